#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "nosqlfuzz/distance.hpp"
#include "nosqlfuzz/filter.hpp"
#include "nosqlfuzz/value.hpp"

namespace nosqlfuzz {

struct DuplicateId : std::runtime_error {
    explicit DuplicateId(const std::string& what) : std::runtime_error(what) {}
};

struct ExecutedFindRecord {
    std::string database;
    std::string collection;
    Filter filter;
    bool returned_empty = false;
    int action_index = 0;
};

struct NoSqlDistanceReport {
    struct Entry {
        std::size_t record_ordinal;  // position in DatabaseState::records()
        ExecutedFindRecord record;
        Distance distance;
    };
    std::vector<Entry> entries;
    std::map<int, int> commands_per_action;
};

/// In-memory monitored document database. Owns one seeded id stream so a
/// reset state replays identical synthetic ids for identical operations.
class DatabaseState {
  public:
    explicit DatabaseState(std::uint64_t seed) : seed_(seed) {}

    void reset();
    void set_current_action(int index) { current_action_ = index; }

    /// Appends the document, assigning a synthetic ObjectId _id when none
    /// is present, and returns the stored _id value. Throws DuplicateId
    /// when an explicit _id already exists in the collection.
    Value insert(const std::string& db, const std::string& coll, const Document& d);

    /// All matching documents in insertion order. Every call appends an
    /// ExecutedFindRecord; a missing collection yields an empty result.
    std::vector<Document> find(const std::string& db, const std::string& coll, const Filter& f);

    /// Post-execution distance pass over the empty-returning finds:
    /// records whose collection is now empty or whose filter now matches
    /// are skipped, the rest get the current collection distance.
    NoSqlDistanceReport recompute_distances(const DistanceConfig& cfg) const;

    const std::vector<Document>* collection(const std::string& db, const std::string& coll) const;
    const std::vector<ExecutedFindRecord>& records() const { return records_; }
    const std::map<int, int>& commands_per_action() const { return commands_; }
    const std::map<std::pair<std::string, std::string>, std::vector<Document>>& collections() const {
        return collections_;
    }

  private:
    std::uint64_t seed_;
    std::uint64_t oid_counter_ = 0;
    int current_action_ = 0;
    std::map<std::pair<std::string, std::string>, std::vector<Document>> collections_;
    std::vector<ExecutedFindRecord> records_;
    std::map<int, int> commands_;
};

}  // namespace nosqlfuzz

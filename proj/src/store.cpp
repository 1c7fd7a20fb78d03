#include "nosqlfuzz/store.hpp"

#include <algorithm>

#include "nosqlfuzz/rng.hpp"

namespace nosqlfuzz {

void DatabaseState::reset() {
    collections_.clear();
    records_.clear();
    commands_.clear();
    oid_counter_ = 0;
    current_action_ = 0;
}

Value DatabaseState::insert(const std::string& db, const std::string& coll, const Document& d) {
    commands_[current_action_] += 1;
    auto& docs = collections_[{db, coll}];
    Value id = Null{};
    Document stored;
    if (const Value* explicit_id = d.find("_id")) {
        for (const Document& existing : docs) {
            const Value* other = existing.find("_id");
            if (other && *other == *explicit_id) {
                throw DuplicateId("duplicate _id in " + db + "." + coll + ": " +
                                  render_value(*explicit_id));
            }
        }
        id = *explicit_id;
        stored = d;
    } else {
        id = ObjectId(synthetic_hex24(seed_, oid_counter_++));
        stored.set("_id", id);
        for (const auto& [name, value] : d.fields()) stored.set(name, value);
    }
    docs.push_back(std::move(stored));
    return id;
}

std::vector<Document> DatabaseState::find(const std::string& db, const std::string& coll,
                                          const Filter& f) {
    commands_[current_action_] += 1;
    std::vector<Document> out;
    if (const auto* docs = collection(db, coll)) {
        for (const Document& d : *docs) {
            if (matches(d, f)) out.push_back(d);
        }
    }
    records_.push_back({db, coll, f, out.empty(), current_action_});
    return out;
}

NoSqlDistanceReport DatabaseState::recompute_distances(const DistanceConfig& cfg) const {
    NoSqlDistanceReport report;
    report.commands_per_action = commands_;
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const ExecutedFindRecord& rec = records_[i];
        if (!rec.returned_empty) continue;
        const auto* docs = collection(rec.database, rec.collection);
        if (!docs || docs->empty()) continue;
        bool now_matches = std::any_of(docs->begin(), docs->end(),
                                       [&](const Document& d) { return matches(d, rec.filter); });
        if (now_matches) continue;
        report.entries.push_back({i, rec, collection_distance(*docs, rec.filter, cfg)});
    }
    return report;
}

const std::vector<Document>* DatabaseState::collection(const std::string& db,
                                                       const std::string& coll) const {
    auto it = collections_.find({db, coll});
    if (it == collections_.end()) return nullptr;
    return &it->second;
}

}  // namespace nosqlfuzz

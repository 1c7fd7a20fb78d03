#include "nosqlfuzz/search.hpp"

#include <algorithm>

namespace nosqlfuzz {

namespace {

double mean_normalized(const std::vector<Distance>& dset) {
    if (dset.empty()) return 1.0;
    double sum = 0.0;
    for (Distance d : dset) sum += nu(d);
    return sum / static_cast<double>(dset.size());
}

double score_of(const Individual& ind, const std::string& target) {
    auto it = ind.score.find(target);
    return it == ind.score.end() ? 0.0 : it->second.h;
}

int k_of(const Individual& ind, const std::string& target) {
    auto it = ind.kcount.find(target);
    return it == ind.kcount.end() ? 0 : it->second;
}

double d_of(const Individual& ind, const std::string& target) {
    auto it = ind.dset.find(target);
    return it == ind.dset.end() ? 1.0 : mean_normalized(it->second);
}

}  // namespace

int compare_for_target(const Individual& a, const Individual& b, const std::string& target,
                       bool use_nosql_heuristic) {
    if (!a.evaluated || !b.evaluated) throw UnevaluatedIndividual();
    double ha = score_of(a, target);
    double hb = score_of(b, target);
    if (ha != hb) return ha < hb ? -1 : 1;
    int ka = k_of(a, target);
    int kb = k_of(b, target);
    if (ka != kb) return ka < kb ? -1 : 1;
    if (!use_nosql_heuristic) return 0;
    double da = d_of(a, target);
    double db = d_of(b, target);
    if (da != db) return da < db ? 1 : -1;
    return 0;
}

Fuzzer::Fuzzer(Scenario scenario, const SearchConfig& cfg)
    : scenario_(std::move(scenario)),
      cfg_(cfg),
      rng_(cfg.seed),
      state_(cfg.seed),
      targets_(list_targets(scenario_)) {}

Individual Fuzzer::evaluate(const TestCase& tc) {
    ExecConfig ec;
    ec.distance = cfg_.distance;
    ec.use_nosql_heuristic = cfg_.use_nosql_heuristic;
    ExecutionResult res = execute(scenario_, tc, state_, registry_, ec);

    Individual ind;
    ind.tc = tc;
    ind.evaluated = true;
    ind.covered = res.covered;
    ind.score = res.best;
    for (const auto& [target, best] : res.best) {
        auto kit = res.report.commands_per_action.find(best.action);
        ind.kcount[target] = kit == res.report.commands_per_action.end() ? 0 : kit->second;
        std::vector<Distance> ds;
        for (const auto& [ordinal, dist] : res.exec_distances) {
            if (state_.records()[ordinal].action_index == best.action) ds.push_back(dist);
        }
        ind.dset[target] = std::move(ds);
    }
    for (const ExecutedFindRecord& rec : state_.records()) {
        if (!rec.returned_empty) continue;
        std::pair<std::string, std::string> key{rec.database, rec.collection};
        if (std::find(ind.empty_finds.begin(), ind.empty_finds.end(), key) ==
            ind.empty_finds.end()) {
            ind.empty_finds.push_back(key);
        }
    }
    return ind;
}

Value Fuzzer::random_param(ParamKind kind) {
    switch (kind) {
        case ParamKind::Int:
            return Value(static_cast<std::int32_t>(rng_.range(-256, 256)));
        case ParamKind::Char:
            return Value(std::string(1, static_cast<char>('a' + rng_.below(26))));
        case ParamKind::Double:
            return Value(static_cast<double>(rng_.range(-256, 256)));
        case ParamKind::Str: {
            std::string s;
            std::uint64_t len = rng_.below(7);
            for (std::uint64_t j = 0; j < len; ++j) {
                s.push_back(static_cast<char>('a' + rng_.below(26)));
            }
            return Value(s);
        }
    }
    return Value();
}

TestCase Fuzzer::sample_random() {
    TestCase tc;
    std::uint64_t ncalls = 1 + rng_.below(3);
    for (std::uint64_t i = 0; i < ncalls; ++i) {
        const Endpoint& ep = rng_.pick(scenario_.endpoints);
        EndpointCall call;
        call.endpoint = ep.name;
        for (const Param& p : ep.params) call.args.push_back(random_param(p.kind));
        tc.calls.push_back(std::move(call));
    }
    return tc;
}

namespace {

Value shift_codepoint(const std::string& text, std::int64_t delta) {
    auto cps = utf8_codepoints(text);
    if (cps.empty()) return Value(text);
    std::int64_t cp = cps[0] + delta;
    if (cp < 1) cp = 1;
    if (cp > 0x10ffff) cp = 0x10ffff;
    cps[0] = static_cast<std::int32_t>(cp);
    return Value(codepoints_to_utf8(cps));
}

std::int64_t signed_pow2(Rng& rng, int max_exp) {
    std::int64_t d = std::int64_t{1} << rng.below(static_cast<std::uint64_t>(max_exp) + 1);
    return rng.chance(0.5) ? d : -d;
}

Value mutate_text(const std::string& s, Rng& rng) {
    std::uint64_t roll = rng.below(3);
    if (roll == 0 || s.empty()) {
        std::string t = s;
        t.push_back(static_cast<char>('a' + rng.below(26)));
        return Value(t);
    }
    if (roll == 1) {
        std::string t = s;
        t.pop_back();
        return Value(t);
    }
    auto cps = utf8_codepoints(s);
    std::uint64_t i = rng.below(cps.size());
    std::int64_t cp = cps[i] + (rng.chance(0.5) ? 1 : -1);
    if (cp < 1) cp = 1;
    cps[i] = static_cast<std::int32_t>(cp);
    return Value(codepoints_to_utf8(cps));
}

Value mutate_value(const Value& v, const SynthesisConfig& syn, Rng& rng);

Value mutate_array(const Array& a, const SynthesisConfig& syn, Rng& rng) {
    Array out = a;
    std::uint64_t roll = rng.below(3);
    if (roll == 0 || out.empty()) {
        out.push_back(Value(static_cast<std::int32_t>(
            rng.range(syn.numeric_min, syn.numeric_max))));
    } else if (roll == 1) {
        out.erase(out.begin() + static_cast<std::ptrdiff_t>(rng.below(out.size())));
    } else {
        std::uint64_t i = rng.below(out.size());
        out[i] = mutate_value(out[i], syn, rng);
    }
    return Value(out);
}

Value mutate_value(const Value& v, const SynthesisConfig& syn, Rng& rng) {
    switch (v.kind()) {
        case ValueKind::Null: return Value(static_cast<std::int32_t>(rng.range(-8, 8)));
        case ValueKind::Bool: return Value(!v.as_bool());
        case ValueKind::Int32:
            return Value(static_cast<std::int32_t>(v.as_int32() + signed_pow2(rng, 8)));
        case ValueKind::Int64: return Value(v.as_int64() + signed_pow2(rng, 8));
        case ValueKind::Double:
            return Value(v.as_double() + static_cast<double>(signed_pow2(rng, 8)));
        case ValueKind::Text: {
            const std::string& s = v.as_text();
            if (utf8_codepoints(s).size() == 1) return shift_codepoint(s, signed_pow2(rng, 1));
            return mutate_text(s, rng);
        }
        case ValueKind::Array: return mutate_array(v.as_array(), syn, rng);
        case ValueKind::Doc: {
            Document d = v.as_doc();
            if (d.empty()) {
                d.set("a", Value(static_cast<std::int32_t>(rng.range(-8, 8))));
            } else {
                const auto& f = d.fields()[rng.below(d.size())];
                d.set(f.first, mutate_value(f.second, syn, rng));
            }
            return Value(d);
        }
        case ValueKind::ObjectId: return Value(ObjectId(synthetic_hex24(rng.next_u64(), 0)));
    }
    return v;
}

}  // namespace

TestCase Fuzzer::mutate(const Individual& parent) {
    if (!parent.evaluated) throw UnevaluatedIndividual();
    TestCase tc = parent.tc;

    if (cfg_.allow_insertion && !parent.empty_finds.empty() &&
        tc.action_count() < cfg_.max_actions && rng_.chance(cfg_.p_insertion)) {
        const auto& key = rng_.pick(parent.empty_finds);
        if (auto schema = registry_.lookup(key.first, key.second)) {
            Document doc = synthesize_document(*schema, cfg_.synthesis, rng_);
            tc.insertions.insert(tc.insertions.begin(),
                                 MongoInsertion{key.first, key.second, std::move(doc)});
            return tc;
        }
    }

    // Mostly single steps; occasionally a short chain, which can cross
    // valleys a lone coordinate move cannot.
    apply_mutation(tc);
    for (int extra = 0; extra < 2 && rng_.chance(0.25); ++extra) apply_mutation(tc);
    return tc;
}

void Fuzzer::apply_mutation(TestCase& tc) {
    // One structural or value mutation among whatever the genotype offers.
    std::vector<std::size_t> param_call;
    std::vector<std::size_t> param_idx;
    for (std::size_t c = 0; c < tc.calls.size(); ++c) {
        for (std::size_t p = 0; p < tc.calls[c].args.size(); ++p) {
            param_call.push_back(c);
            param_idx.push_back(p);
        }
    }

    enum class Op { Param, InsertDoc, AddCall, RemoveCall, RemoveInsert };
    std::vector<Op> ops;
    auto weight = [&](Op op, int w) {
        for (int i = 0; i < w; ++i) ops.push_back(op);
    };
    if (!param_call.empty()) weight(Op::Param, 10);
    if (!tc.insertions.empty()) weight(Op::InsertDoc, 6);
    if (tc.action_count() < cfg_.max_actions) weight(Op::AddCall, 2);
    if (tc.calls.size() > 1) weight(Op::RemoveCall, 1);
    if (!tc.insertions.empty()) weight(Op::RemoveInsert, 1);
    if (ops.empty()) {
        weight(Op::AddCall, 1);  // degenerate genotype: retry growth anyway
    }

    switch (rng_.pick(ops)) {
        case Op::Param: {
            std::uint64_t i = rng_.below(param_call.size());
            EndpointCall& call = tc.calls[param_call[i]];
            const Endpoint* ep = find_endpoint(scenario_, call.endpoint);
            Value& v = call.args[param_idx[i]];
            ParamKind kind = ep->params[param_idx[i]].kind;
            if (rng_.chance(0.25)) {
                v = random_param(kind);  // resample: escape hatch off local plateaus
                break;
            }
            switch (kind) {
                case ParamKind::Int:
                    v = Value(static_cast<std::int32_t>(v.as_int32() + signed_pow2(rng_, 8)));
                    break;
                case ParamKind::Char: v = shift_codepoint(v.as_text(), signed_pow2(rng_, 1)); break;
                case ParamKind::Double:
                    v = Value(v.as_double() + static_cast<double>(signed_pow2(rng_, 8)));
                    break;
                case ParamKind::Str: v = mutate_text(v.as_text(), rng_); break;
            }
            break;
        }
        case Op::InsertDoc: {
            MongoInsertion& ins = tc.insertions[rng_.below(tc.insertions.size())];
            std::uint64_t roll = rng_.below(10);
            if (roll == 0 && !ins.doc.empty()) {
                // Shape repair: drop a field so a malformed document can
                // drift back toward the declared schema.
                ins.doc.remove(ins.doc.fields()[rng_.below(ins.doc.size())].first);
                break;
            }
            if (roll == 1) {
                auto schema = registry_.lookup(ins.db, ins.coll);
                if (schema && !schema->fields.empty()) {
                    auto it = schema->fields.begin();
                    std::advance(it, static_cast<std::ptrdiff_t>(rng_.below(schema->fields.size())));
                    ins.doc.set(it->first, random_value_of_type(it->second, cfg_.synthesis, rng_));
                    break;
                }
            }
            if (ins.doc.empty()) {
                ins.doc.set("a", Value(static_cast<std::int32_t>(rng_.range(-8, 8))));
            } else {
                const auto& f = ins.doc.fields()[rng_.below(ins.doc.size())];
                ins.doc.set(f.first, mutate_value(f.second, cfg_.synthesis, rng_));
            }
            break;
        }
        case Op::AddCall: {
            TestCase sampled = sample_random();
            tc.calls.push_back(sampled.calls.front());
            break;
        }
        case Op::RemoveCall:
            tc.calls.erase(tc.calls.begin() + static_cast<std::ptrdiff_t>(rng_.below(tc.calls.size())));
            break;
        case Op::RemoveInsert:
            tc.insertions.erase(tc.insertions.begin() +
                                static_cast<std::ptrdiff_t>(rng_.below(tc.insertions.size())));
            break;
    }
}

void Fuzzer::incorporate(Individual ind) {
    for (const std::string& t : targets_) {
        bool covers = ind.covered.count(t) > 0;
        if (covers) {
            auto it = archive_.find(t);
            if (it == archive_.end()) {
                covered_.insert(t);
                first_cover_[t] = evaluations_;
                archive_.emplace(t, ind);
                populations_.erase(t);
            } else if (ind.tc.action_count() < it->second.tc.action_count()) {
                it->second = ind;
            }
            continue;
        }
        if (covered_.count(t)) continue;
        auto sit = ind.score.find(t);
        if (sit == ind.score.end() || sit->second.h <= 0.0) continue;
        auto& pop = populations_[t];
        // Newest first so stable sort lets a tied newcomer displace an
        // incumbent; plateaus drift instead of freezing.
        pop.insert(pop.begin(), ind);
        std::stable_sort(pop.begin(), pop.end(),
                         [&](const Individual& a, const Individual& b) {
                             return compare_for_target(a, b, t, cfg_.use_nosql_heuristic) > 0;
                         });
        if (pop.size() > cfg_.population_per_target) pop.resize(cfg_.population_per_target);
    }
}

const Individual* Fuzzer::select_parent(std::string* target_out) {
    std::size_t n = targets_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::string& t = targets_[(cursor_ + i) % n];
        if (covered_.count(t)) continue;
        auto pit = populations_.find(t);
        if (pit == populations_.end() || pit->second.empty()) continue;
        cursor_ = (cursor_ + i + 1) % n;
        *target_out = t;
        return &pit->second[rng_.below(pit->second.size())];
    }
    return nullptr;
}

SuiteResult Fuzzer::run() {
    std::size_t focus_at =
        static_cast<std::size_t>(cfg_.focus_fraction * static_cast<double>(cfg_.budget));
    while (evaluations_ < cfg_.budget && covered_.size() < targets_.size()) {
        double p_r = 0.0;
        if (focus_at > 0 && evaluations_ < focus_at) {
            p_r = cfg_.p_random *
                  (1.0 - static_cast<double>(evaluations_) / static_cast<double>(focus_at));
        }
        TestCase tc;
        std::string target;
        const Individual* parent = nullptr;
        if (!rng_.chance(p_r)) parent = select_parent(&target);
        tc = parent ? mutate(*parent) : sample_random();
        ++evaluations_;
        incorporate(evaluate(tc));
    }

    SuiteResult out;
    out.targets = targets_;
    out.evaluations = evaluations_;
    out.first_cover = first_cover_;
    for (const std::string& t : covered_) out.covered.push_back(t);
    std::set<std::string> seen;
    for (const std::string& t : out.covered) {
        std::string key = testcase_to_json(archive_.at(t).tc).dump();
        if (seen.insert(key).second) out.suite.push_back(archive_.at(t).tc);
    }
    return out;
}

SuiteResult fuzz(const Scenario& scenario, const SearchConfig& cfg) {
    Fuzzer fuzzer(scenario, cfg);
    return fuzzer.run();
}

}  // namespace nosqlfuzz

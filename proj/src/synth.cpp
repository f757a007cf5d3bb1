#include "difm/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

namespace difm {

using nlohmann::json;

void GeneratorConfig::validate() const {
    if (n_users < 1) throw ConfigError("n_users must be >= 1");
    if (!(fraud_rate > 0.0 && fraud_rate < 1.0)) throw ConfigError("fraud_rate must be in (0, 1)");
    if (n_fields < 3) throw ConfigError("need at least 3 signal fields (2 pair hosts + 1 stable)");
    if (noise_fields < 0) throw ConfigError("noise_fields must be >= 0");
    if (min_events < 1 || max_events < min_events) throw ConfigError("invalid events-per-user range");
    if (variation_strength < 0.0 || variation_strength > 1.0) throw ConfigError("variation_strength must be in [0, 1]");
    if (interaction_strength < 0.0 || interaction_strength > 1.0)
        throw ConfigError("interaction_strength must be in [0, 1]");
    if (contamination < 0.0 || contamination > 1.0) throw ConfigError("contamination must be in [0, 1]");
    if (n_pairs < 1) throw ConfigError("n_pairs must be >= 1");
    // churn redraws a different value, pair hosts need a non-risky pool
    if (vocab_size < 2) throw ConfigError("vocab_size too small for value churn (need >= 2)");
    if (vocab_size <= n_pairs)
        throw ConfigError("vocab_size must exceed n_pairs so pair fields keep ordinary values");
}

static std::string token_name(int v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "v%03d", v);
    return buf;
}

namespace {

struct FieldNames {
    std::vector<std::string> pair_fields;    // exactly 2
    std::vector<std::string> stable_fields;  // n_fields - 2
    std::vector<std::string> noise_fields;
};

FieldNames field_names(const GeneratorConfig& cfg) {
    FieldNames names;
    names.pair_fields = {"risk_a", "risk_b"};
    for (int i = 0; i + 2 < cfg.n_fields; ++i) names.stable_fields.push_back("stable_" + std::to_string(i));
    for (int i = 0; i < cfg.noise_fields; ++i) names.noise_fields.push_back("noise_" + std::to_string(i));
    return names;
}

}  // namespace

Generated generate_records(const GeneratorConfig& cfg) {
    cfg.validate();
    Rng rng(derive_seed(cfg.seed, 0x9e4));
    FieldNames names = field_names(cfg);

    int plain_pool = cfg.vocab_size - cfg.n_pairs;  // pair-field tokens below this are ordinary

    Generated gen;
    gen.manifest.seed = cfg.seed;
    gen.manifest.stable_fields = names.stable_fields;
    for (int j = 0; j < cfg.n_pairs; ++j) {
        PlantedPair p;
        p.field_a = names.pair_fields[0];
        p.token_a = token_name(plain_pool + j);
        p.field_b = names.pair_fields[1];
        p.token_b = token_name(plain_pool + j);
        gen.manifest.pairs.push_back(p);
        gen.manifest.high_risk_values.push_back({p.field_a, p.token_a});
        gen.manifest.high_risk_values.push_back({p.field_b, p.token_b});
    }

    gen.records.reserve(cfg.n_users);
    for (int u = 0; u < cfg.n_users; ++u) {
        RawRecord rec;
        char uid[16];
        std::snprintf(uid, sizeof(uid), "u%06d", u);
        rec.user_id = uid;
        rec.label = rng.bernoulli(cfg.fraud_rate) ? 1 : 0;

        int n_events = rng.range(cfg.min_events, cfg.max_events);

        // baseline contamination, identical for both classes
        bool contaminated_churn = rng.bernoulli(cfg.contamination);
        int churn_event = contaminated_churn && n_events > 1 ? rng.range(1, n_events - 1) : -1;
        int churn_field = names.stable_fields.empty() ? -1 : static_cast<int>(rng.below(names.stable_fields.size()));
        bool contaminated_pair = rng.bernoulli(cfg.contamination);
        int pair_id = static_cast<int>(rng.below(static_cast<uint64_t>(cfg.n_pairs)));

        std::vector<int> stable_vals(names.stable_fields.size());
        for (auto& v : stable_vals) v = static_cast<int>(rng.below(cfg.vocab_size));

        // Event types mirror real traffic: history events are account activity
        // carrying the stable and noise fields, the final event is the scored
        // payment carrying the pair-host fields. Single-event users therefore
        // expose no value variations at all.
        for (int t = 0; t < n_events; ++t) {
            RawEvent ev;
            bool payment = t == n_events - 1;
            if (!payment) {
                for (size_t f = 0; f < names.stable_fields.size(); ++f) {
                    bool redraw = false;
                    if (t > 0 && rec.label == 1 && rng.bernoulli(cfg.variation_strength)) redraw = true;
                    if (t == churn_event && static_cast<int>(f) == churn_field) redraw = true;
                    if (redraw) {
                        int next = static_cast<int>(rng.below(cfg.vocab_size - 1));
                        if (next >= stable_vals[f]) ++next;  // force an actual change
                        stable_vals[f] = next;
                    }
                    ev.fields[names.stable_fields[f]] = RawValue{false, token_name(stable_vals[f]), 0.0};
                }
                for (const auto& nf : names.noise_fields)
                    ev.fields[nf] = RawValue{false, token_name(static_cast<int>(rng.below(cfg.vocab_size))), 0.0};
            } else {
                // Pair hosts draw over the whole vocabulary, risky tokens
                // included, so a lone risky value is common in clean traffic
                // and only the matched combination marks the planted signal.
                // Ordinary draws reroll matched collisions, keeping planted
                // pairs out of the baseline except through the contamination
                // path above.
                bool plant_pair = contaminated_pair;
                if (rec.label == 1 && rng.bernoulli(cfg.interaction_strength)) {
                    plant_pair = true;
                    pair_id = static_cast<int>(rng.below(static_cast<uint64_t>(cfg.n_pairs)));
                }
                if (plant_pair) {
                    ev.fields[names.pair_fields[0]] = RawValue{false, token_name(plain_pool + pair_id), 0.0};
                    ev.fields[names.pair_fields[1]] = RawValue{false, token_name(plain_pool + pair_id), 0.0};
                } else {
                    int a, b;
                    do {
                        a = static_cast<int>(rng.below(cfg.vocab_size));
                        b = static_cast<int>(rng.below(cfg.vocab_size));
                    } while (a == b && a >= plain_pool);
                    ev.fields[names.pair_fields[0]] = RawValue{false, token_name(a), 0.0};
                    ev.fields[names.pair_fields[1]] = RawValue{false, token_name(b), 0.0};
                }
            }

            if (cfg.with_amount) {
                double amount = std::round(rng.uniform(1.0, 500.0) * 100.0) / 100.0;
                ev.fields["amount"] = RawValue{true, "", amount};
            }
            rec.events.push_back(std::move(ev));
        }
        gen.records.push_back(std::move(rec));
    }
    return gen;
}

void generate(const GeneratorConfig& cfg, const std::string& dataset_path, const std::string& manifest_path) {
    Generated gen = generate_records(cfg);
    std::ofstream out(dataset_path);
    if (!out) throw DataError("cannot open dataset file for writing: " + dataset_path);
    for (const auto& rec : gen.records) out << record_to_json(rec) << "\n";
    if (!out) throw DataError("failed writing dataset file: " + dataset_path);
    gen.manifest.save(manifest_path);
}

void Manifest::save(const std::string& path) const {
    json jpairs = json::array();
    for (const auto& p : pairs)
        jpairs.push_back({{"field_a", p.field_a}, {"token_a", p.token_a}, {"field_b", p.field_b}, {"token_b", p.token_b}});
    json jvals = json::array();
    for (const auto& v : high_risk_values) jvals.push_back({{"field", v.field}, {"token", v.token}});
    json j{{"format", "difm.manifest"}, {"version", 1},        {"seed", seed},
           {"pairs", jpairs},           {"high_risk_values", jvals}, {"stable_fields", stable_fields}};
    std::ofstream out(path);
    if (!out) throw DataError("cannot open manifest file for writing: " + path);
    out << j.dump(2) << "\n";
}

Manifest Manifest::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("malformed manifest file " + path + ": " + e.what());
    }
    if (j.value("format", "") != "difm.manifest") throw DataError("not a manifest file: " + path);
    Manifest m;
    m.seed = j.value("seed", 0ULL);
    for (const auto& p : j.at("pairs"))
        m.pairs.push_back({p.at("field_a"), p.at("token_a"), p.at("field_b"), p.at("token_b")});
    for (const auto& v : j.at("high_risk_values")) m.high_risk_values.push_back({v.at("field"), v.at("token")});
    for (const auto& s : j.at("stable_fields")) m.stable_fields.push_back(s.get<std::string>());
    return m;
}

DatasetSummary describe(const std::string& dataset_path) {
    DatasetSummary s;
    std::set<std::string> fields;
    for_each_record(dataset_path, [&](const RawRecord& rec) {
        (rec.label == 1 ? s.n_pos : s.n_neg)++;
        s.n_events += static_cast<long>(rec.events.size());
        for (const auto& ev : rec.events)
            for (const auto& [name, _] : ev.fields) fields.insert(name);
    });
    s.n_fields = static_cast<long>(fields.size());
    return s;
}

std::string to_string(const DatasetSummary& s) {
    return "#pos=" + std::to_string(s.n_pos) + " #neg=" + std::to_string(s.n_neg) +
           " #fields=" + std::to_string(s.n_fields) + " #events=" + std::to_string(s.n_events);
}

}  // namespace difm

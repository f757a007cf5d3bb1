#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "difm/data_model.hpp"

namespace difm {

// Labeled event-sequence generator with two independently plantable fraud
// signals: value churn on otherwise-stable fields, and high-risk value pairs
// co-occurring inside single events. Every user shares the same baseline
// behavior (including a small contamination rate of either signal), so at
// strengths (0, 0) the features carry no label information.
struct GeneratorConfig {
    uint64_t seed = 0;
    int n_users = 1000;
    double fraud_rate = 0.05;
    int n_fields = 6;      // categorical signal fields: first two host pairs, the rest stay stable
    int vocab_size = 30;   // tokens per categorical field
    int noise_fields = 2;  // label-independent uniform categorical fields
    int min_events = 1;
    int max_events = 8;
    double variation_strength = 0.0;   // per event+field churn probability for fraud users
    double interaction_strength = 0.0; // per event pair-insertion probability for fraud users
    double contamination = 0.02;       // rate at which legitimate behavior shows one signal instance
    int n_pairs = 5;                   // planted high-risk value pairs
    bool with_amount = true;           // include a numerical field

    void validate() const;
};

struct PlantedPair {
    std::string field_a, token_a;
    std::string field_b, token_b;
};

struct PlantedValue {
    std::string field, token;
};

// Ground truth emitted next to the dataset so downstream reports can be
// checked against what was actually planted.
struct Manifest {
    uint64_t seed = 0;
    std::vector<PlantedPair> pairs;
    std::vector<PlantedValue> high_risk_values;
    std::vector<std::string> stable_fields;

    void save(const std::string& path) const;
    static Manifest load(const std::string& path);
};

struct Generated {
    std::vector<RawRecord> records;
    Manifest manifest;
};

Generated generate_records(const GeneratorConfig& cfg);

// Writes the dataset (one JSON record per line) and the manifest. Same seed,
// same bytes.
void generate(const GeneratorConfig& cfg, const std::string& dataset_path, const std::string& manifest_path);

struct DatasetSummary {
    long n_pos = 0;
    long n_neg = 0;
    long n_fields = 0;
    long n_events = 0;
};

DatasetSummary describe(const std::string& dataset_path);
std::string to_string(const DatasetSummary& s);

}  // namespace difm

#pragma once

#include <string>
#include <vector>

#include "difm/data_model.hpp"
#include "difm/model.hpp"

namespace difm {

struct ValueRanking {
    std::string token;
    int global_index = 0;
    double weight = 0.0;
    long support_total = 0;  // samples containing the value
    long support_pos = 0;    // of which labeled fraud
};

struct FieldRanking {
    std::string field;
    std::vector<ValueRanking> high;  // largest wide weights first
    std::vector<ValueRanking> low;   // smallest wide weights first
};

// Global wide-weight report. Categorical fields only; numerical fields carry
// a single slot and have no ranking to speak of.
struct GlobalReport {
    bool untrained = false;  // all wide weights tied, ranking withheld
    int top_k = 0;
    long min_support = 0;
    std::vector<FieldRanking> fields;
};

GlobalReport rank_wide_weights(const ModelParams& params, const FieldValueDictionary& dict, int top_k,
                               long min_support, const std::vector<RawRecord>& dataset);

struct SampleImportance {
    std::string user_id;
    std::vector<std::pair<std::string, double>> field_weights;  // field name -> importance
    std::vector<double> event_weights;                          // history events, oldest first
    bool history_empty = false;
    // change_flags[t][n]: field n differs from the previous event; row 0 is all false
    std::vector<std::vector<bool>> change_flags;
};

// Echoes the importance weights of an eval-mode forward pass and derives
// per-field change flags from the raw encodings (parameters never affect the
// flags).
SampleImportance sample_importance(const EventSequence& sample, const ModelParams& params, const ModelConfig& cfg,
                                   const IndexLayout& layout, const FieldValueDictionary& dict);

void write_report(std::ostream& out, const GlobalReport& global);
void write_report(std::ostream& out, const SampleImportance& sample);

}  // namespace difm

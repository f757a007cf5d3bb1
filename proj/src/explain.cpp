#include "difm/explain.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>

namespace difm {

GlobalReport rank_wide_weights(const ModelParams& params, const FieldValueDictionary& dict, int top_k,
                               long min_support, const std::vector<RawRecord>& dataset) {
    if (params.vocab_size() != dict.size())
        throw DataError("wide weight vector does not match the dictionary size");
    if (top_k < 1) throw ConfigError("top_k must be >= 1");

    GlobalReport report;
    report.top_k = top_k;
    report.min_support = min_support;

    // per-sample presence counts, split by label
    std::vector<long> total(dict.size(), 0), pos(dict.size(), 0);
    for (const auto& rec : dataset) {
        EventSequence enc = encode_sample(rec, dict, static_cast<int>(rec.events.size()));
        std::set<int> present;
        for (const auto& ev : enc.events)
            for (const auto& e : ev.entries) present.insert(e.index);
        for (int idx : present) {
            total[idx]++;
            if (rec.label == 1) pos[idx]++;
        }
    }

    // all-tied weights carry no ranking information
    bool tied = true;
    for (double w : params.wide_weights)
        if (w != params.wide_weights[0]) tied = false;
    if (tied) {
        report.untrained = true;
        return report;
    }

    for (const auto& f : dict.fields) {
        if (f.schema.kind != FieldKind::categorical) continue;
        std::vector<ValueRanking> values;
        for (int idx = f.range_begin; idx < f.range_end; ++idx) {
            if (total[idx] < min_support) continue;
            values.push_back({dict.token_of_index(idx), idx, params.wide_weights[idx], total[idx], pos[idx]});
        }
        std::sort(values.begin(), values.end(), [](const ValueRanking& a, const ValueRanking& b) {
            if (a.weight != b.weight) return a.weight > b.weight;
            return a.global_index < b.global_index;
        });
        FieldRanking fr;
        fr.field = f.schema.name;
        size_t k = std::min<size_t>(top_k, values.size());
        fr.high.assign(values.begin(), values.begin() + k);
        fr.low.assign(values.rbegin(), values.rbegin() + k);
        report.fields.push_back(std::move(fr));
    }
    return report;
}

SampleImportance sample_importance(const EventSequence& sample, const ModelParams& params, const ModelConfig& cfg,
                                   const IndexLayout& layout, const FieldValueDictionary& dict) {
    ForwardTrace tr = forward(sample, params, cfg, layout, Mode::eval);

    SampleImportance out;
    out.user_id = sample.user_id;
    for (int n = 0; n < cfg.n_fields && n < static_cast<int>(tr.field_weights.size()); ++n)
        out.field_weights.emplace_back(dict.fields[n].schema.name, tr.field_weights[n]);
    out.event_weights = tr.event_weights;
    out.history_empty = sample.events.size() < 2;

    // change flags come from the encodings alone
    out.change_flags.assign(sample.events.size(), std::vector<bool>(cfg.n_fields, false));
    for (size_t t = 1; t < sample.events.size(); ++t) {
        for (int n = 0; n < cfg.n_fields; ++n) {
            const SparseEntry* prev = nullptr;
            const SparseEntry* cur = nullptr;
            for (const auto& e : sample.events[t - 1].entries)
                if (layout.field_of[e.index] == n) prev = &e;
            for (const auto& e : sample.events[t].entries)
                if (layout.field_of[e.index] == n) cur = &e;
            bool changed;
            if (prev == nullptr && cur == nullptr)
                changed = false;
            else if (prev == nullptr || cur == nullptr)
                changed = true;
            else
                changed = prev->index != cur->index || prev->value != cur->value;
            out.change_flags[t][n] = changed;
        }
    }
    return out;
}

static std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

void write_report(std::ostream& out, const GlobalReport& global) {
    out << "section=global top_k=" << global.top_k << " min_support=" << global.min_support << "\n";
    if (global.untrained) {
        out << "untrained=1\n";
        return;
    }
    for (const auto& f : global.fields) {
        for (const auto& v : f.high)
            out << "field=" << f.field << " rank=high token=" << v.token << " weight=" << fmt(v.weight)
                << " support=" << v.support_pos << "/" << v.support_total << "\n";
        for (const auto& v : f.low)
            out << "field=" << f.field << " rank=low token=" << v.token << " weight=" << fmt(v.weight)
                << " support=" << v.support_pos << "/" << v.support_total << "\n";
    }
}

void write_report(std::ostream& out, const SampleImportance& sample) {
    out << "section=sample user_id=" << sample.user_id << "\n";
    for (const auto& [name, w] : sample.field_weights) out << "field_weight field=" << name << " weight=" << fmt(w) << "\n";
    if (sample.history_empty) {
        out << "event_weights=omitted reason=no_history\n";
    } else {
        for (size_t t = 0; t < sample.event_weights.size(); ++t)
            out << "event_weight t=" << t << " weight=" << fmt(sample.event_weights[t]) << "\n";
    }
    for (size_t t = 0; t < sample.change_flags.size(); ++t) {
        out << "changes t=" << t << " flags=";
        for (bool b : sample.change_flags[t]) out << (b ? '1' : '0');
        out << "\n";
    }
}

}  // namespace difm

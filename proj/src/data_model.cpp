#include "difm/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace difm {

using nlohmann::json;

// Plain scan keeps a finished dictionary state-free, so concurrent encoders
// can share it; field counts are small.
const FieldValueDictionary::FieldEntry* FieldValueDictionary::find_field(const std::string& name) const {
    for (const auto& f : fields)
        if (f.schema.name == name) return &f;
    return nullptr;
}

int FieldValueDictionary::field_of_index(int global_index) const {
    for (const auto& f : fields) {
        if (global_index >= f.range_begin && global_index < f.range_end) return f.schema.field_id;
    }
    throw DataError("global index " + std::to_string(global_index) + " outside every field range");
}

std::string FieldValueDictionary::token_of_index(int global_index) const {
    const auto& f = fields[field_of_index(global_index)];
    if (f.schema.kind == FieldKind::numerical) return f.schema.name;
    if (global_index == f.oov_index) return "<OOV>";
    for (const auto& [tok, idx] : f.tokens) {
        if (idx == global_index) return tok;
    }
    throw DataError("index " + std::to_string(global_index) + " has no token in field " + f.schema.name);
}

static json dict_to_json(const FieldValueDictionary& dict) {
    json fields = json::array();
    for (const auto& f : dict.fields) {
        json jf;
        jf["id"] = f.schema.field_id;
        jf["name"] = f.schema.name;
        jf["kind"] = f.schema.kind == FieldKind::categorical ? "categorical" : "numerical";
        jf["range"] = {f.range_begin, f.range_end};
        if (f.schema.kind == FieldKind::categorical) {
            json toks = json::object();
            for (const auto& [tok, idx] : f.tokens) toks[tok] = idx;
            jf["tokens"] = toks;
            jf["oov"] = f.oov_index;
        } else {
            jf["index"] = f.value_index;
            jf["mean"] = f.stats.mean;
            jf["stddev"] = f.stats.stddev;
        }
        fields.push_back(jf);
    }
    return json{{"format", "difm.dict"}, {"version", 1}, {"fields", fields}};
}

std::string FieldValueDictionary::canonical_string() const { return dict_to_json(*this).dump(); }

void FieldValueDictionary::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open dictionary file for writing: " + path);
    out << dict_to_json(*this).dump(2) << "\n";
}

FieldValueDictionary FieldValueDictionary::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dictionary file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("malformed dictionary file " + path + ": " + e.what());
    }
    if (j.value("format", "") != "difm.dict") throw DataError("not a dictionary file: " + path);
    if (j.value("version", 0) != 1) throw DataError("unsupported dictionary version in " + path);

    FieldValueDictionary dict;
    for (const auto& jf : j.at("fields")) {
        FieldValueDictionary::FieldEntry f;
        f.schema.field_id = jf.at("id").get<int>();
        f.schema.name = jf.at("name").get<std::string>();
        f.schema.kind = jf.at("kind").get<std::string>() == "categorical" ? FieldKind::categorical : FieldKind::numerical;
        f.range_begin = jf.at("range")[0].get<int>();
        f.range_end = jf.at("range")[1].get<int>();
        if (f.schema.kind == FieldKind::categorical) {
            for (const auto& [tok, idx] : jf.at("tokens").items()) f.tokens[tok] = idx.get<int>();
            f.oov_index = jf.at("oov").get<int>();
        } else {
            f.value_index = jf.at("index").get<int>();
            f.stats.mean = jf.at("mean").get<double>();
            f.stats.stddev = jf.at("stddev").get<double>();
        }
        dict.fields.push_back(std::move(f));
    }
    return dict;
}

static void check_schema(const Schema& schema) {
    for (size_t i = 0; i < schema.size(); ++i) {
        if (schema[i].field_id != static_cast<int>(i)) {
            throw ConfigError("schema field ids must be contiguous from 0; got " + std::to_string(schema[i].field_id) +
                              " at position " + std::to_string(i));
        }
    }
}

FieldValueDictionary build_dictionary(const std::vector<RawRecord>& records, const Schema& schema, int min_count) {
    check_schema(schema);

    std::vector<std::map<std::string, long>> counts(schema.size());
    std::vector<double> sum(schema.size(), 0.0), sum_sq(schema.size(), 0.0);
    std::vector<long> n_num(schema.size(), 0);

    for (const auto& rec : records) {
        for (const auto& ev : rec.events) {
            for (const auto& [name, value] : ev.fields) {
                auto it = std::find_if(schema.begin(), schema.end(), [&](const FieldSchema& f) { return f.name == name; });
                if (it == schema.end()) throw DataError("unknown field name in record " + rec.user_id + ": " + name);
                if (it->kind == FieldKind::categorical) {
                    if (value.is_number)
                        throw DataError("numerical value for categorical field " + name + " in record " + rec.user_id);
                    counts[it->field_id][value.token]++;
                } else {
                    if (!value.is_number)
                        throw DataError("token value for numerical field " + name + " in record " + rec.user_id);
                    if (!std::isfinite(value.number))
                        throw DataError("non-finite value for numerical field " + name + " in record " + rec.user_id);
                    sum[it->field_id] += value.number;
                    sum_sq[it->field_id] += value.number * value.number;
                    n_num[it->field_id]++;
                }
            }
        }
    }

    FieldValueDictionary dict;
    int next = 0;
    for (const auto& fs : schema) {
        FieldValueDictionary::FieldEntry f;
        f.schema = fs;
        f.range_begin = next;
        if (fs.kind == FieldKind::categorical) {
            for (const auto& [tok, c] : counts[fs.field_id]) {
                if (c >= min_count) f.tokens[tok] = next++;
            }
            f.oov_index = next++;
        } else {
            f.value_index = next++;
            if (n_num[fs.field_id] > 0) {
                double n = static_cast<double>(n_num[fs.field_id]);
                f.stats.mean = sum[fs.field_id] / n;
                double var = sum_sq[fs.field_id] / n - f.stats.mean * f.stats.mean;
                f.stats.stddev = var > 1e-24 ? std::sqrt(var) : 1.0;
            }
        }
        f.range_end = next;
        dict.fields.push_back(std::move(f));
    }
    return dict;
}

EventSequence encode_sample(const RawRecord& record, const FieldValueDictionary& dict, int max_events) {
    if (record.events.empty()) throw DataError("record " + record.user_id + " has 0 events; at least 1 required");
    if (max_events < 1) throw ConfigError("max_events must be >= 1");

    EventSequence seq;
    seq.user_id = record.user_id;
    seq.label = record.label;

    size_t n = record.events.size();
    size_t first = n > static_cast<size_t>(max_events) ? n - static_cast<size_t>(max_events) : 0;

    for (size_t t = first; t < n; ++t) {
        SparseVector sv;
        for (const auto& [name, value] : record.events[t].fields) {
            const auto* f = dict.find_field(name);
            if (f == nullptr) throw DataError("unknown field name in record " + record.user_id + ": " + name);
            SparseEntry e;
            if (f->schema.kind == FieldKind::categorical) {
                if (value.is_number)
                    throw DataError("numerical value for categorical field " + name + " in record " + record.user_id);
                auto it = f->tokens.find(value.token);
                e.index = it == f->tokens.end() ? f->oov_index : it->second;
                e.value = 1.0;
            } else {
                if (!value.is_number)
                    throw DataError("token value for numerical field " + name + " in record " + record.user_id);
                if (!std::isfinite(value.number))
                    throw DataError("non-finite value for numerical field " + name + " in record " + record.user_id);
                e.index = f->value_index;
                e.value = (value.number - f->stats.mean) / f->stats.stddev;
            }
            sv.entries.push_back(e);
        }
        std::sort(sv.entries.begin(), sv.entries.end(),
                  [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
        seq.events.push_back(std::move(sv));
    }
    return seq;
}

RawEvent decode_event(const SparseVector& event, const FieldValueDictionary& dict) {
    RawEvent out;
    for (const auto& e : event.entries) {
        const auto& f = dict.fields[dict.field_of_index(e.index)];
        RawValue v;
        if (f.schema.kind == FieldKind::categorical) {
            v.is_number = false;
            v.token = dict.token_of_index(e.index);
        } else {
            v.is_number = true;
            v.number = e.value * f.stats.stddev + f.stats.mean;
        }
        out.fields[f.schema.name] = std::move(v);
    }
    return out;
}

void validate_sparse(const SparseVector& event, const FieldValueDictionary& dict) {
    int prev = -1;
    for (const auto& e : event.entries) {
        if (e.index <= prev) throw DataError("sparse indices not strictly increasing");
        prev = e.index;
        if (!std::isfinite(e.value)) throw DataError("non-finite sparse value");
        const auto& f = dict.fields[dict.field_of_index(e.index)];
        if (f.schema.kind == FieldKind::categorical && e.value != 1.0)
            throw DataError("categorical entry value must be exactly 1.0");
    }
}

Schema infer_schema(const std::vector<RawRecord>& records) {
    std::map<std::string, FieldKind> kinds;
    for (const auto& rec : records) {
        for (const auto& ev : rec.events) {
            for (const auto& [name, value] : ev.fields) {
                FieldKind k = value.is_number ? FieldKind::numerical : FieldKind::categorical;
                auto [it, inserted] = kinds.emplace(name, k);
                if (!inserted && it->second != k)
                    throw DataError("field " + name + " appears as both categorical and numerical");
            }
        }
    }
    Schema schema;
    int id = 0;
    for (const auto& [name, kind] : kinds) schema.push_back({id++, name, kind});
    return schema;
}

RawRecord parse_record(const std::string& line, size_t line_number) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw DataError("malformed record at line " + std::to_string(line_number) + ": " + e.what());
    }
    RawRecord rec;
    try {
        rec.user_id = j.at("user_id").get<std::string>();
        rec.label = j.at("label").get<int>();
        if (rec.label != 0 && rec.label != 1)
            throw DataError("label must be 0 or 1 at line " + std::to_string(line_number));
        for (const auto& jev : j.at("events")) {
            RawEvent ev;
            for (const auto& [name, val] : jev.items()) {
                RawValue v;
                if (val.is_string()) {
                    v.is_number = false;
                    v.token = val.get<std::string>();
                } else if (val.is_number()) {
                    v.is_number = true;
                    v.number = val.get<double>();
                } else {
                    // one value per field per event; arrays and objects are rejected
                    throw DataError("field " + name + " at line " + std::to_string(line_number) +
                                    " must hold a single string or number");
                }
                ev.fields[name] = std::move(v);
            }
            rec.events.push_back(std::move(ev));
        }
    } catch (const json::exception& e) {
        throw DataError("bad record at line " + std::to_string(line_number) + ": " + e.what());
    }
    return rec;
}

std::string record_to_json(const RawRecord& record) {
    json events = json::array();
    for (const auto& ev : record.events) {
        json jev = json::object();
        for (const auto& [name, v] : ev.fields) {
            if (v.is_number)
                jev[name] = v.number;
            else
                jev[name] = v.token;
        }
        events.push_back(jev);
    }
    return json{{"user_id", record.user_id}, {"label", record.label}, {"events", events}}.dump();
}

void for_each_record(const std::string& path, const std::function<void(const RawRecord&)>& fn) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file: " + path);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        fn(parse_record(line, lineno));
    }
}

std::vector<RawRecord> load_dataset(const std::string& path) {
    std::vector<RawRecord> records;
    for_each_record(path, [&](const RawRecord& r) { records.push_back(r); });
    return records;
}

}  // namespace difm

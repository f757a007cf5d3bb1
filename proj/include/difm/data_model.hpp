#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "difm/common.hpp"

namespace difm {

enum class FieldKind { categorical, numerical };

struct FieldSchema {
    int field_id = 0;  // contiguous, unique, [0, N)
    std::string name;
    FieldKind kind = FieldKind::categorical;
};

using Schema = std::vector<FieldSchema>;

// One raw field value as it appears in the dataset file.
struct RawValue {
    bool is_number = false;
    std::string token;  // categorical
    double number = 0.0;
};

struct RawEvent {
    // field name -> value; ordered map keeps records deterministic
    std::map<std::string, RawValue> fields;
};

struct RawRecord {
    std::string user_id;
    int label = 0;
    std::vector<RawEvent> events;  // time-ordered, last is the scored payment event
};

struct SparseEntry {
    int index = 0;  // global field-value index
    double value = 0.0;
};

// Entries strictly increasing by index; categorical values are exactly 1.0.
struct SparseVector {
    std::vector<SparseEntry> entries;
};

struct EventSequence {
    std::string user_id;
    int label = 0;
    std::vector<SparseVector> events;
};

struct NumericStats {
    double mean = 0.0;
    double stddev = 1.0;
};

// Global field-value dictionary. Every global index in [0, size()) belongs to
// exactly one field's range; categorical fields end their range with a
// dedicated OOV slot, numerical fields own a single index.
class FieldValueDictionary {
  public:
    struct FieldEntry {
        FieldSchema schema;
        int range_begin = 0;
        int range_end = 0;                      // exclusive
        std::map<std::string, int> tokens;      // categorical only
        int oov_index = -1;                     // categorical only
        int value_index = -1;                   // numerical only
        NumericStats stats;                     // numerical only
    };

    std::vector<FieldEntry> fields;

    int size() const { return fields.empty() ? 0 : fields.back().range_end; }
    int field_count() const { return static_cast<int>(fields.size()); }

    const FieldEntry* find_field(const std::string& name) const;
    int field_of_index(int global_index) const;

    // Inverse lookup: global index -> token ("<OOV>" for OOV slots).
    std::string token_of_index(int global_index) const;

    std::string canonical_string() const;
    uint64_t hash() const { return fnv1a64(canonical_string()); }

    void save(const std::string& path) const;
    static FieldValueDictionary load(const std::string& path);
};

// Categorical tokens with frequency >= min_count get their own index, the rest
// share the field's OOV slot. Numerical normalization stats come from the
// same records (the training split).
FieldValueDictionary build_dictionary(const std::vector<RawRecord>& records, const Schema& schema, int min_count);

// Keeps the most recent max_events events (the current event is always the
// last and always retained), z-scores numerical values, maps unknown tokens
// to the field OOV index.
EventSequence encode_sample(const RawRecord& record, const FieldValueDictionary& dict, int max_events);

// Inverse of encode for one event; numerical values are de-normalized.
RawEvent decode_event(const SparseVector& event, const FieldValueDictionary& dict);

// Throws DataError when an invariant is violated (ordering, finiteness,
// out-of-range index, categorical value != 1).
void validate_sparse(const SparseVector& event, const FieldValueDictionary& dict);

// Field names sorted lexicographically, kinds taken from the JSON value
// types; a field seen as both string and number is a schema error.
Schema infer_schema(const std::vector<RawRecord>& records);

// Dataset file: one JSON object per line with user_id, label, events.
RawRecord parse_record(const std::string& line, size_t line_number);
std::string record_to_json(const RawRecord& record);
std::vector<RawRecord> load_dataset(const std::string& path);
void for_each_record(const std::string& path, const std::function<void(const RawRecord&)>& fn);

}  // namespace difm

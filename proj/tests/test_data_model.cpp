#include <doctest.h>

#include <cmath>
#include <sstream>

#include "difm/data_model.hpp"

using namespace difm;

namespace {

RawRecord make_record(const std::string& uid, int label,
                      const std::vector<std::vector<std::pair<std::string, RawValue>>>& events) {
    RawRecord rec;
    rec.user_id = uid;
    rec.label = label;
    for (const auto& ev : events) {
        RawEvent e;
        for (const auto& [k, v] : ev) e.fields[k] = v;
        rec.events.push_back(e);
    }
    return rec;
}

RawValue tok(const std::string& t) { return RawValue{false, t, 0.0}; }
RawValue num(double x) { return RawValue{true, "", x}; }

}  // namespace

TEST_CASE("dictionary build applies the frequency threshold") {
    Schema schema{{0, "ip", FieldKind::categorical}};
    std::vector<RawRecord> records;
    for (int i = 0; i < 5; ++i) records.push_back(make_record("u" + std::to_string(i), 0, {{{"ip", tok("a")}}}));
    records.push_back(make_record("u5", 0, {{{"ip", tok("b")}}}));

    auto dict = build_dictionary(records, schema, 2);
    const auto& f = dict.fields[0];
    CHECK(f.tokens.count("a") == 1);
    CHECK(f.tokens.count("b") == 0);  // below threshold, shares the OOV slot
    CHECK(dict.size() == 2);          // "a" + OOV

    auto enc = encode_sample(records[5], dict, 10);
    CHECK(enc.events[0].entries[0].index == f.oov_index);
    CHECK(enc.events[0].entries[0].value == 1.0);
}

TEST_CASE("dictionary over an empty dataset holds only OOV and numeric slots") {
    Schema schema{{0, "ip", FieldKind::categorical}, {1, "amount", FieldKind::numerical}};
    auto dict = build_dictionary({}, schema, 1);
    CHECK(dict.size() == 2);  // one OOV + one numeric slot
    CHECK(dict.fields[0].tokens.empty());
    CHECK(dict.fields[1].value_index == 1);
}

TEST_CASE("dictionary size sums kept tokens, OOV slots and numeric slots") {
    Schema schema{{0, "a", FieldKind::categorical},
                  {1, "b", FieldKind::categorical},
                  {2, "c", FieldKind::categorical},
                  {3, "x", FieldKind::numerical}};
    std::vector<RawRecord> records;
    auto add = [&](const std::string& field, const std::string& t) {
        records.push_back(make_record("u" + std::to_string(records.size()), 0, {{{field, tok(t)}}}));
    };
    for (int i = 0; i < 4; ++i) add("a", "a" + std::to_string(i));
    for (int i = 0; i < 2; ++i) add("b", "b" + std::to_string(i));
    for (int i = 0; i < 5; ++i) add("c", "c" + std::to_string(i));

    auto dict = build_dictionary(records, schema, 1);
    CHECK(dict.size() == (5 + 3 + 6) + 1);  // kept+OOV per categorical field, one numeric slot

    // every global index belongs to exactly one field range
    for (int idx = 0; idx < dict.size(); ++idx) {
        int owners = 0;
        for (const auto& f : dict.fields)
            if (idx >= f.range_begin && idx < f.range_end) ++owners;
        CHECK(owners == 1);
    }
}

TEST_CASE("unknown field names are schema errors") {
    Schema schema{{0, "ip", FieldKind::categorical}};
    auto rec = make_record("u0", 0, {{{"device", tok("d1")}}});
    CHECK_THROWS_WITH_AS(build_dictionary({rec}, schema, 1), doctest::Contains("device"), DataError);

    auto dict = build_dictionary({}, schema, 1);
    CHECK_THROWS_WITH_AS(encode_sample(rec, dict, 5), doctest::Contains("device"), DataError);
}

TEST_CASE("encode keeps the most recent window") {
    Schema schema{{0, "ip", FieldKind::categorical}};
    std::vector<std::vector<std::pair<std::string, RawValue>>> events;
    for (int i = 0; i < 25; ++i) events.push_back({{"ip", tok("t" + std::to_string(i))}});
    auto rec = make_record("u0", 1, events);
    auto dict = build_dictionary({rec}, schema, 1);

    auto enc = encode_sample(rec, dict, 20);
    REQUIRE(enc.events.size() == 20);
    // the 19 most recent history events plus the current one survive
    CHECK(enc.events.front().entries[0].index == dict.fields[0].tokens.at("t5"));
    CHECK(enc.events.back().entries[0].index == dict.fields[0].tokens.at("t24"));
    CHECK(enc.label == 1);

    auto one = make_record("u1", 0, {{{"ip", tok("t0")}}});
    CHECK(encode_sample(one, dict, 20).events.size() == 1);
}

TEST_CASE("encode rejections") {
    Schema schema{{0, "ip", FieldKind::categorical}, {1, "amount", FieldKind::numerical}};
    auto dict = build_dictionary({}, schema, 1);

    RawRecord empty;
    empty.user_id = "u0";
    CHECK_THROWS_WITH_AS(encode_sample(empty, dict, 5), doctest::Contains("0 events"), DataError);

    auto bad = make_record("u1", 0, {{{"amount", num(std::nan(""))}}});
    CHECK_THROWS_WITH_AS(encode_sample(bad, dict, 5), doctest::Contains("amount"), DataError);
}

TEST_CASE("numerical fields are z-scored from build statistics") {
    Schema schema{{0, "amount", FieldKind::numerical}};
    std::vector<RawRecord> records{
        make_record("u0", 0, {{{"amount", num(10.0)}}}),
        make_record("u1", 0, {{{"amount", num(20.0)}}}),
        make_record("u2", 0, {{{"amount", num(30.0)}}}),
    };
    auto dict = build_dictionary(records, schema, 1);
    CHECK(dict.fields[0].stats.mean == doctest::Approx(20.0));
    CHECK(dict.fields[0].stats.stddev == doctest::Approx(std::sqrt(200.0 / 3.0)));

    auto enc = encode_sample(records[0], dict, 5);
    CHECK(enc.events[0].entries[0].value == doctest::Approx((10.0 - 20.0) / std::sqrt(200.0 / 3.0)));

    auto back = decode_event(enc.events[0], dict);
    CHECK(back.fields.at("amount").number == doctest::Approx(10.0));
}

TEST_CASE("encode round trip reproduces kept tokens") {
    Schema schema{{0, "ip", FieldKind::categorical}, {1, "cat", FieldKind::categorical}};
    Rng rng(99);
    std::vector<RawRecord> records;
    for (int u = 0; u < 30; ++u) {
        std::vector<std::vector<std::pair<std::string, RawValue>>> events;
        int n = 1 + static_cast<int>(rng.below(6));
        for (int t = 0; t < n; ++t) {
            events.push_back({{"ip", tok("ip" + std::to_string(rng.below(10)))},
                              {"cat", tok("c" + std::to_string(rng.below(4)))}});
        }
        records.push_back(make_record("u" + std::to_string(u), 0, events));
    }
    auto dict = build_dictionary(records, schema, 1);  // min_count 1: everything in-vocabulary

    for (const auto& rec : records) {
        auto enc = encode_sample(rec, dict, 4);
        size_t offset = rec.events.size() - enc.events.size();
        for (size_t t = 0; t < enc.events.size(); ++t) {
            validate_sparse(enc.events[t], dict);
            auto back = decode_event(enc.events[t], dict);
            for (const auto& [name, v] : rec.events[offset + t].fields)
                CHECK(back.fields.at(name).token == v.token);
        }
        // determinism
        auto enc2 = encode_sample(rec, dict, 4);
        REQUIRE(enc.events.size() == enc2.events.size());
        for (size_t t = 0; t < enc.events.size(); ++t) {
            REQUIRE(enc.events[t].entries.size() == enc2.events[t].entries.size());
            for (size_t i = 0; i < enc.events[t].entries.size(); ++i) {
                CHECK(enc.events[t].entries[i].index == enc2.events[t].entries[i].index);
                CHECK(enc.events[t].entries[i].value == enc2.events[t].entries[i].value);
            }
        }
    }
}

TEST_CASE("dictionary file round trip preserves the hash") {
    Schema schema{{0, "ip", FieldKind::categorical}, {1, "amount", FieldKind::numerical}};
    std::vector<RawRecord> records{
        make_record("u0", 0, {{{"ip", tok("a")}, {"amount", num(12.5)}}}),
        make_record("u1", 1, {{{"ip", tok("b")}, {"amount", num(99.25)}}}),
    };
    auto dict = build_dictionary(records, schema, 1);
    dict.save("/tmp/difm_test_dict.json");
    auto loaded = FieldValueDictionary::load("/tmp/difm_test_dict.json");
    CHECK(loaded.hash() == dict.hash());
    CHECK(loaded.size() == dict.size());
    CHECK(loaded.fields[1].stats.mean == dict.fields[1].stats.mean);
}

TEST_CASE("record parsing") {
    SUBCASE("good line") {
        auto rec = parse_record(R"({"user_id":"u1","label":1,"events":[{"ip":"a","amount":3.5}]})", 1);
        CHECK(rec.user_id == "u1");
        CHECK(rec.label == 1);
        CHECK(rec.events[0].fields.at("ip").token == "a");
        CHECK(rec.events[0].fields.at("amount").number == doctest::Approx(3.5));
    }
    SUBCASE("malformed json names the line") {
        CHECK_THROWS_WITH_AS(parse_record("{oops", 17), doctest::Contains("17"), DataError);
    }
    SUBCASE("multiple values per field are rejected") {
        CHECK_THROWS_AS(parse_record(R"({"user_id":"u1","label":0,"events":[{"ip":["a","b"]}]})", 1), DataError);
    }
    SUBCASE("labels outside {0,1} are rejected") {
        CHECK_THROWS_AS(parse_record(R"({"user_id":"u1","label":2,"events":[{"ip":"a"}]})", 1), DataError);
    }
    SUBCASE("serialization round trips") {
        auto rec = parse_record(R"({"user_id":"u1","label":1,"events":[{"ip":"a","amount":3.5}]})", 1);
        auto rec2 = parse_record(record_to_json(rec), 1);
        CHECK(record_to_json(rec2) == record_to_json(rec));
    }
}

TEST_CASE("schema inference") {
    std::vector<RawRecord> records{make_record("u0", 0, {{{"ip", tok("a")}, {"amount", num(1.0)}}})};
    auto schema = infer_schema(records);
    REQUIRE(schema.size() == 2);
    CHECK(schema[0].name == "amount");
    CHECK(schema[0].kind == FieldKind::numerical);
    CHECK(schema[1].name == "ip");
    CHECK(schema[1].kind == FieldKind::categorical);

    records.push_back(make_record("u1", 0, {{{"ip", num(3.0)}}}));
    CHECK_THROWS_WITH_AS(infer_schema(records), doctest::Contains("ip"), DataError);
}

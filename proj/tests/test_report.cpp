#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "k3f/report.hpp"
#include "test_util.hpp"

using namespace k3f;
namespace fs = std::filesystem;

TEST_CASE("root symbols are compared up to order") {
    CHECK(normalize_roots("A7 A3 A1^2") == "A1^2 A3 A7");
    CHECK(normalize_roots("A1^2 A3 A7") == "A1^2 A3 A7");
    CHECK(normalize_roots("D4 D4 E8") == "D4^2 E8");
    CHECK(normalize_roots("A11 D7 E6") == "A11 D7 E6");
    CHECK(normalize_roots("0") == "0");
    CHECK(normalize_mw("Z^2 + Z/2") == normalize_mw("Z^2+Z/2"));
}

TEST_CASE("named isometry files") {
    auto h = read_named_isometries(data_path("presets/oguiso/hodge.txt"), 4);
    REQUIRE(h.size() == 4);
    CHECK(h[0].name == "h1");
    CHECK(h[3].name == "h6");
    CHECK(h[0].g == FiniteIsometry::identity(4));
    auto plain = preset_isometries("oguiso", "hodge.txt", 4);
    for (size_t i = 0; i < plain.size(); ++i) CHECK(plain[i] == h[i].g);
}

TEST_CASE("reference tables are internally consistent") {
    for (auto& name : preset_names()) {
        CAPTURE(name);
        Preset p = load_preset(name);
        REQUIRE(p.reference.has_value());
        const Reference& r = *p.reference;
        CHECK(r.preset == name);
        CHECK(r.frames.size() == r.classes);
        REQUIRE(r.totals.size() == r.hodge_orders.size());
        for (size_t h = 0; h < r.totals.size(); ++h) {
            uint64_t s = 0;
            for (auto& f : r.frames) s += f.multiplicities.at(h);
            CHECK(s == r.totals[h]);
        }
        if (r.mass) {
            Rat m;
            for (auto& f : r.frames) m += Rat(1) / Rat(f.aut_order);
            CHECK(m == *r.mass);
        }
    }
}

TEST_CASE("frames are matched by their invariants") {
    Reference ref = read_reference(data_path("presets/barth-peters/reference.jsonl"));
    std::vector<FrameReport> frames(2);
    frames[0].roots = "E7^2 A1^2";
    frames[0].mw.torsion = {Int(2)};
    frames[0].root_count = 256;
    frames[0].aut_order = Int("134842259865600");
    frames[1] = frames[0];
    frames[1].aut_order += 1;
    auto m = match_frames(frames, ref);
    REQUIRE(m[0] >= 0);
    CHECK(ref.frames[size_t(m[0])].id == "W4");
    CHECK(m[1] == -1);
}

TEST_CASE("manifest records") {
    Transcendental T(preset_T("barth-peters"));
    auto h = resolve_hodge(T, HodgeSpec{});
    FrameReport f;
    f.id = "W1";
    f.roots = "D8 E8";
    f.root_count = 352;
    f.aut_order = Int("7191587192832000");
    f.disc_image_order = 2;
    f.multiplicities = {1};
    auto j = nlohmann::ordered_json::parse(frame_record(f, "W1"));
    CHECK(j["type"] == "frame");
    CHECK(j["aut_order"] == "7191587192832000");
    CHECK(j.begin().key() == "type");
    auto t = nlohmann::ordered_json::parse(total_record(h[0], 7, Bounds{6, 12}));
    CHECK(t["total"] == 7);
    CHECK(t["upper"] == 12);
    auto l = nlohmann::ordered_json::parse(lattice_record("bp", T, 2));
    CHECK(l["orthogonal_group_order"] == 2);

    fs::path dir = fs::temp_directory_path() / "k3f_manifest_test";
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "m.jsonl");
        out << lattice_record("bp", T, 2) << "\n" << hodge_record(h[0], T) << "\n" << frame_record(f, "") << "\n";
    }
    auto lines = read_manifest((dir / "m.jsonl").string());
    REQUIRE(lines.size() == 3);
    CHECK(lines[1].type == "hodge");
    CHECK(lines[2].type == "frame");
    {
        std::ofstream out(dir / "bad.jsonl");
        out << "{\"type\": \n";
    }
    CHECK_THROWS_AS(read_manifest((dir / "bad.jsonl").string()), InputError);
    fs::remove_all(dir);
}

TEST_CASE("genus cache") {
    fs::path dir = fs::temp_directory_path() / "k3f_cache_test";
    fs::remove_all(dir);
    GramLattice seed = lattice_from_expression("D8 E8");
    bool hit = true;
    GenusList a = enumerate_genus_cached(seed, {}, dir.string(), &hit);
    CHECK_FALSE(hit);
    GenusList b = enumerate_genus_cached(seed, {}, dir.string(), &hit);
    CHECK(hit);
    REQUIRE(a.classes.size() == b.classes.size());
    for (size_t i = 0; i < a.classes.size(); ++i) {
        CHECK(a.classes[i].lattice.gram() == b.classes[i].lattice.gram());
        CHECK(a.classes[i].aut.order == b.classes[i].aut.order);
    }
    CHECK(b.mass == b.expected_mass);
    // a damaged entry is replaced
    fs::path file = dir / (genus_cache_key(seed) + ".txt");
    {
        std::ofstream out(file);
        out << "primes 1 3\nclasses 1\n16\n";
    }
    GenusList c = enumerate_genus_cached(seed, {}, dir.string(), &hit);
    CHECK_FALSE(hit);
    CHECK(c.classes.size() == 6);
    enumerate_genus_cached(seed, {}, dir.string(), &hit);
    CHECK(hit);
    fs::remove_all(dir);
}

TEST_CASE("unknown presets") { CHECK_THROWS_AS(load_preset("fermat"), InputError); }

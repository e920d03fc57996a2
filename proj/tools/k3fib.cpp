// k3fib: discriminant forms, frame genera and fibration counts from a transcendental lattice.
#include <omp.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "k3f/counting.hpp"
#include "k3f/report.hpp"

using namespace k3f;
namespace fs = std::filesystem;

namespace {

struct Options {
    std::string preset, lattice, seed, out, hodge_gen;
    std::vector<long> primes;
    int threads = 0;
    uint32_t hodge_order = 0;
    bool all_hodge = false;
    uint64_t max_candidates = 0;
    int entry_bound = 10;
    int kernel_size = 2;
    bool quiet = false;
};

void progress(const Options& o, const std::string& s) {
    if (!o.quiet) std::cerr << "k3fib: " << s << std::endl;
}

// Simple left-aligned table.
void print_table(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
    std::vector<size_t> w;
    for (auto& r : rows)
        for (size_t i = 0; i < r.size(); ++i) {
            if (w.size() <= i) w.push_back(0);
            w[i] = std::max(w[i], r[i].size());
        }
    for (auto& r : rows) {
        std::string line;
        for (size_t i = 0; i < r.size(); ++i) {
            line += r[i];
            if (i + 1 < r.size()) line += std::string(w[i] - r[i].size() + 2, ' ');
        }
        out << line << "\n";
    }
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
    return s;
}

std::string signature_str(const GramLattice& L) {
    auto s = signature(L);
    return "(" + std::to_string(s.first) + "," + std::to_string(s.second) + ")";
}

struct Input {
    std::string name;
    std::optional<GramLattice> T;
    std::optional<GramLattice> seed;
    std::optional<Preset> preset;
};

Input load_input(const Options& o, bool need_T) {
    Input in;
    if (!o.preset.empty() && !o.lattice.empty()) throw InputError("--preset and --lattice are exclusive");
    if (!o.preset.empty()) {
        in.preset = load_preset(o.preset);
        in.name = o.preset;
        in.T = in.preset->T;
        in.seed = in.preset->seed;
    } else if (!o.lattice.empty()) {
        in.name = o.lattice;
        in.T = read_lattice_file(o.lattice);
    }
    if (!o.seed.empty()) in.seed = read_lattice_file(o.seed);
    if (need_T && !in.T) throw InputError("a lattice is required (--preset NAME or --lattice FILE)");
    return in;
}

WalkOptions walk_options(const Options& o) {
    WalkOptions w;
    w.primes = o.primes;
    w.progress = [&o](const std::string& s) { progress(o, s); };
    return w;
}

GenusList run_walk(const Options& o, const GramLattice& seed) {
    const char* dir = std::getenv("K3F_CACHE_DIR");
    return enumerate_genus_cached(seed, walk_options(o), dir ? dir : "");
}

void check_seed(const Input& in) {
    if (!in.seed) throw InputError("a seed lattice of the frame genus is required (--seed FILE)");
    if (in.T && !in_genus(*in.seed, frame_genus_descriptor(*in.T))) throw InputError("seed not in frame genus");
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p);
    if (!f) throw InputError("cannot write " + p.string());
    f << text;
}

int cmd_discriminant(const Options& o) {
    Input in = load_input(o, true);
    Transcendental T(*in.T);
    const auto& q = T.disc().q;
    std::cout << "lattice: " << in.name << "\n";
    std::cout << "rank " << T.lattice().rank() << ", signature " << signature_str(T.lattice()) << ", det "
              << T.lattice().det() << "\n";
    if (q.trivial()) {
        std::cout << "trivial form, 1 class\n";
        return 0;
    }
    std::cout << "discriminant form: " << q.describe() << "\n";
    std::cout << "generators: " << (T.natural_basis() ? "t_i/k_i" : "Smith normal form") << "\n";
    auto cc = conjugacy_classes(T.group());
    std::cout << "|O(q)| = " << T.group().order() << ", " << cc.classes.size() << " classes\n";
    std::map<uint32_t, int> by_order;
    for (auto& c : cc.classes) by_order[c.element_order]++;
    std::vector<std::string> parts;
    for (auto& [m, k] : by_order) parts.push_back(std::to_string(k) + " of order " + std::to_string(m));
    std::cout << "classes by element order: " << join(parts, ", ") << "\n";
    if (!o.out.empty()) {
        fs::create_directories(o.out);
        write_file(fs::path(o.out) / "manifest.jsonl", lattice_record(in.name, T, cc.classes.size()) + "\n");
    }
    return 0;
}

int cmd_genus(const Options& o) {
    Input in = load_input(o, false);
    if (!in.seed) {
        if (in.T) throw InputError("a seed lattice of the frame genus is required (--seed FILE)");
        throw InputError("a lattice is required (--preset NAME, --lattice FILE or --seed FILE)");
    }
    check_seed(in);
    GenusList g = run_walk(o, *in.seed);
    std::cout << "genus: " << g.descriptor.describe() << "\n";
    std::cout << "classes: " << g.classes.size() << "\n";
    std::vector<std::vector<std::string>> rows = {{"id", "roots", "MW", "|Delta|", "|O(W)|", "|O#(W)|"}};
    std::vector<std::string> records = {genus_record(g)};
    std::vector<uint64_t> disc(g.classes.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (size_t i = 0; i < g.classes.size(); ++i) disc[i] = discriminant_image_order(g.classes[i]);
    for (size_t i = 0; i < g.classes.size(); ++i) {
        const GenusClass& W = g.classes[i];
        std::string id = "W" + std::to_string(i + 1);
        rows.push_back({id, W.roots.symbol(), W.mw.str(), std::to_string(W.roots.root_count), W.aut.order.get_str(),
                        std::to_string(disc[i])});
        records.push_back(class_record(id, W, disc[i]));
    }
    print_table(std::cout, rows);
    std::cout << "primes: ";
    for (size_t i = 0; i < g.primes.size(); ++i) std::cout << (i ? "," : "") << g.primes[i];
    std::cout << "\n";
    bool ok = g.mass == g.expected_mass;
    std::cout << "mass " << g.mass.get_str() << (ok ? " OK" : " FAILED, expected " + g.expected_mass.get_str())
              << "\n";
    if (in.preset && in.preset->reference) {
        const Reference& ref = *in.preset->reference;
        bool same = ref.classes == g.classes.size() && (!ref.mass || *ref.mass == g.mass);
        std::cout << "reference: " << ref.classes << " classes" << (ref.mass ? ", mass " + ref.mass->get_str() : "")
                  << (same ? ", agrees" : ", DIFFERS") << "\n";
    }
    if (!o.out.empty()) {
        fs::create_directories(o.out);
        for (size_t i = 0; i < g.classes.size(); ++i) {
            std::ostringstream s;
            s << "# W" << i + 1 << " " << g.classes[i].roots.symbol() << "\n";
            write_lattice(s, g.classes[i].lattice);
            write_file(fs::path(o.out) / ("W" + std::to_string(i + 1) + ".txt"), s.str());
        }
        write_file(fs::path(o.out) / "manifest.jsonl", join(records, "\n") + "\n");
    }
    return ok ? 0 : 2;
}

std::vector<HodgeChoice> hodge_choices(const Options& o, const Transcendental& T) {
    HodgeSpec spec;
    spec.search.entry_bound = o.entry_bound;
    spec.search.kernel_size = o.kernel_size;
    spec.search.max_candidates = o.max_candidates;
    int modes = (o.hodge_order ? 1 : 0) + (o.hodge_gen.empty() ? 0 : 1) + (o.all_hodge ? 1 : 0);
    if (modes > 1) throw InputError("--hodge-order, --hodge-gen and --all-hodge are exclusive");
    if (!o.hodge_gen.empty()) {
        std::vector<HodgeChoice> out;
        auto gens = read_named_isometries(o.hodge_gen, T.disc().q.rank());
        if (gens.empty()) throw InputError(o.hodge_gen + ": no matrices");
        spec.mode = HodgeSpec::Mode::generator;
        for (auto& g : gens) {
            spec.generator = g.g;
            auto c = resolve_hodge(T, spec);
            c[0].label = g.name + ": " + c[0].label;
            out.push_back(c[0]);
        }
        return out;
    }
    if (o.hodge_order) {
        spec.mode = HodgeSpec::Mode::order;
        spec.order = o.hodge_order;
    }
    return resolve_hodge(T, spec);
}

std::string mult_cell(const std::vector<uint64_t>& m) {
    std::vector<std::string> s;
    for (auto x : m) s.push_back(std::to_string(x));
    return join(s, " / ");
}

int cmd_count(const Options& o) {
    Input in = load_input(o, true);
    check_seed(in);
    Transcendental T(*in.T);
    std::cout << "lattice: " << in.name << ", rank " << T.lattice().rank() << ", signature "
              << signature_str(T.lattice()) << ", |O(T^#)| = " << T.group().order() << "\n";
    progress(o, "resolving Hodge subgroups");
    auto hodge = hodge_choices(o, T);
    if (o.hodge_gen.empty())
        std::cout << "Hodge subgroups: lifts searched within entry bound " << o.entry_bound << ", kernel order "
                  << o.kernel_size << "\n";
    else
        std::cout << "Hodge subgroups: generators from " << o.hodge_gen << "\n";
    for (auto& h : hodge) {
        std::cout << "  " << h.label;
        if (h.candidate.lift_order > 0) std::cout << ", lift of order " << h.candidate.lift_order;
        std::cout << "\n";
    }
    GenusList g = run_walk(o, *in.seed);
    std::cout << "frame genus: " << g.classes.size() << " classes, mass " << g.mass.get_str()
              << (g.mass == g.expected_mass ? " OK" : " FAILED") << "\n";
    progress(o, "computing multiplicities");
    CountResult res = count_fibrations(T, g, hodge);

    const Reference* ref = in.preset && in.preset->reference ? &*in.preset->reference : nullptr;
    std::vector<int> match(res.frames.size(), -1);
    if (ref) match = match_frames(res.frames, *ref);

    std::vector<std::string> hdr = {"id"};
    if (ref) hdr.push_back("ref");
    for (auto s : {"roots", "MW", "|Delta|", "|O(W)|", "|O#(W)|", "mult"}) hdr.push_back(s);
    std::vector<std::vector<std::string>> rows = {hdr};
    std::vector<std::string> records = {lattice_record(in.name, T, conjugacy_classes(T.group()).classes.size()),
                                        genus_record(g)};
    for (auto& h : hodge) records.push_back(hodge_record(h, T));
    for (size_t i = 0; i < res.frames.size(); ++i) {
        const FrameReport& f = res.frames[i];
        std::string rid = match[i] >= 0 ? ref->frames[size_t(match[i])].id : (ref ? "-" : "");
        std::vector<std::string> r = {f.id};
        if (ref) r.push_back(rid);
        for (auto s : {f.roots, f.mw.str(), std::to_string(f.root_count), f.aut_order.get_str(),
                       std::to_string(f.disc_image_order), mult_cell(f.multiplicities)})
            r.push_back(s);
        rows.push_back(r);
        records.push_back(frame_record(f, rid == "-" ? "" : rid));
    }
    print_table(std::cout, rows);
    std::vector<std::string> totals, labels;
    for (size_t h = 0; h < hodge.size(); ++h) {
        totals.push_back(std::to_string(res.totals[h]));
        labels.push_back(hodge[h].label);
        records.push_back(total_record(hodge[h], res.totals[h], res.bounds[h]));
    }
    if (hodge.size() > 1) std::cout << "columns: " << join(labels, " / ") << "\n";
    std::cout << "total: " << join(totals, " / ") << "\n";
    for (size_t h = 0; h < hodge.size(); ++h)
        std::cout << "bounds " << hodge[h].label << ": " << res.bounds[h].lower << " <= " << res.totals[h]
                  << " <= " << res.bounds[h].upper << (res.bounds[h].tight() ? " (tight)" : "") << "\n";

    if (ref) {
        size_t matched = 0;
        for (int m : match) matched += m >= 0;
        std::cout << "reference: " << matched << " of " << ref->frames.size() << " frames matched by invariants\n";
        for (size_t h = 0; h < hodge.size(); ++h) {
            uint32_t m = hodge[h].candidate.order;
            auto it = std::find(ref->hodge_orders.begin(), ref->hodge_orders.end(), m);
            if (it == ref->hodge_orders.end()) {
                std::cout << "reference " << hodge[h].label << ": no column\n";
                continue;
            }
            size_t col = size_t(it - ref->hodge_orders.begin());
            size_t agree = 0;
            for (size_t i = 0; i < res.frames.size(); ++i) {
                if (match[i] < 0) continue;
                const ReferenceFrame& rf = ref->frames[size_t(match[i])];
                bool ok = rf.multiplicities[col] == res.frames[i].multiplicities[h];
                if (rf.disc_image_order && *rf.disc_image_order != res.frames[i].disc_image_order) ok = false;
                agree += ok;
            }
            bool total_ok = col < ref->totals.size() && ref->totals[col] == res.totals[h];
            std::cout << "reference " << hodge[h].label << ": " << agree << " of " << ref->frames.size()
                      << " multiplicities agree, total " << (total_ok ? "agrees" : "DIFFERS") << "\n";
        }
        for (size_t c = 0; c < ref->hodge_orders.size(); ++c) {
            bool seen = false;
            for (auto& h : hodge) seen |= h.candidate.order == ref->hodge_orders[c];
            if (!seen)
                std::cout << "reference |H| = " << ref->hodge_orders[c] << ": not among the computed Hodge subgroups\n";
        }
    }
    if (!o.out.empty()) {
        fs::create_directories(o.out);
        write_file(fs::path(o.out) / "manifest.jsonl", join(records, "\n") + "\n");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Jacobian elliptic fibrations on K3 surfaces from the transcendental lattice"};
    app.require_subcommand(1);
    Options o;
    auto common = [&](CLI::App* c) {
        c->add_option("--preset", o.preset, "case study: barth-peters, oguiso, kumar, kloosterman, apery-fermi");
        c->add_option("--lattice", o.lattice, "Gram matrix file of the transcendental lattice");
        c->add_option("--out", o.out, "output directory for lattice files and the manifest");
        c->add_option("--threads", o.threads, "worker threads (default: available parallelism)");
        c->add_flag("--quiet", o.quiet, "no progress messages");
    };
    auto walk = [&](CLI::App* c) {
        c->add_option("--seed", o.seed, "Gram matrix file of a lattice in the frame genus");
        c->add_option("--primes", o.primes, "neighbor primes")->delimiter(',');
    };
    auto* disc = app.add_subcommand("discriminant", "discriminant form, |O(q)| and conjugacy classes");
    common(disc);
    auto* genus = app.add_subcommand("genus", "enumerate the frame genus");
    common(genus);
    walk(genus);
    auto* count = app.add_subcommand("count", "multiplicities of frames and total number of fibrations");
    common(count);
    walk(count);
    count->add_option("--hodge-order", o.hodge_order, "order of the image of the Hodge isometries");
    count->add_option("--hodge-gen", o.hodge_gen, "file of generators of the Hodge image, one matrix per block");
    count->add_flag("--all-hodge", o.all_hodge, "one column per Hodge subgroup found by the lift search (default)");
    count->add_option("--max-candidates", o.max_candidates, "cap on partial lifts visited per order in the search");
    count->add_option("--entry-bound", o.entry_bound, "entry bound of the Hodge lift search")->check(CLI::PositiveNumber);
    count->add_option("--kernel-size", o.kernel_size, "order of the kernel of O_hdg(T) -> O(T^#)")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 3;
    }
    if (o.threads > 0) omp_set_num_threads(o.threads);
    try {
        if (*disc) return cmd_discriminant(o);
        if (*genus) return cmd_genus(o);
        return cmd_count(o);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const MassCheckFailure& e) {
        std::cerr << "mass check failed: " << e.what() << "\n";
        return 2;
    } catch (const ResourceCap& e) {
        std::cerr << "resource cap: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}

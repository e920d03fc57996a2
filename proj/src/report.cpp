#include "k3f/report.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "json.hpp"
#include "k3f/definite.hpp"
#include "k3f/mass.hpp"

namespace k3f {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InputError("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Json isometry_json(const FiniteIsometry& g) {
    Json rows = Json::array();
    for (int i = 0; i < g.k; ++i) {
        Json r = Json::array();
        for (int j = 0; j < g.k; ++j) r.push_back(g.at(i, j));
        rows.push_back(r);
    }
    return rows;
}

Json matrix_json(const ZMat& m) {
    Json rows = Json::array();
    for (int i = 0; i < m.rows(); ++i) {
        Json r = Json::array();
        for (int j = 0; j < m.cols(); ++j) {
            if (m(i, j).fits_slong_p())
                r.push_back(m(i, j).get_si());
            else
                r.push_back(m(i, j).get_str());
        }
        rows.push_back(r);
    }
    return rows;
}

Json mw_json(const MordellWeil& mw) {
    Json t = Json::array();
    for (auto& x : mw.torsion) t.push_back(x.get_si());
    return Json{{"free_rank", mw.free_rank}, {"torsion", t}};
}

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

std::vector<NamedIsometry> read_named_isometries(const std::string& path, int k) {
    std::istringstream in(slurp(path));
    std::vector<NamedIsometry> out;
    std::string line, name, block;
    int unnamed = 0;
    auto flush = [&]() {
        auto gs = parse_isometries(block, k, path);
        for (size_t i = 0; i < gs.size(); ++i) {
            std::string n = name.empty() ? "g" + std::to_string(++unnamed) : name;
            if (i > 0) n += "." + std::to_string(i + 1);
            out.push_back({n, gs[i]});
        }
        block.clear();
        name.clear();
    };
    while (std::getline(in, line)) {
        auto first = line.find_first_not_of(" \t\r");
        if (first != std::string::npos && line[first] == '#') {
            if (block.find_first_not_of(" \t\r\n") != std::string::npos) flush();
            std::string n = line.substr(first + 1);
            n.erase(0, n.find_first_not_of(" \t"));
            n.erase(n.find_last_not_of(" \t\r") + 1);
            name = n;
            block += "\n";
            continue;
        }
        block += line + "\n";
    }
    if (block.find_first_not_of(" \t\r\n") != std::string::npos) flush();
    return out;
}

Reference read_reference(const std::string& path) {
    Reference ref;
    std::istringstream in(slurp(path));
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            Json j = Json::parse(line);
            std::string type = j.at("type");
            if (type == "reference") {
                ref.preset = j.at("preset");
                ref.hodge_orders = j.at("hodge_orders").get<std::vector<uint32_t>>();
            } else if (type == "genus") {
                ref.classes = j.at("classes");
                if (j.contains("mass")) ref.mass = Rat(j.at("mass").get<std::string>());
            } else if (type == "frame") {
                ReferenceFrame f;
                f.id = j.at("id");
                f.roots = j.at("roots");
                f.mw = j.at("mw");
                f.root_count = j.at("root_count");
                f.aut_order = Int(j.at("aut_order").get<std::string>());
                if (j.contains("disc_image_order")) f.disc_image_order = j.at("disc_image_order").get<uint64_t>();
                f.multiplicities = j.at("multiplicities").get<std::vector<uint64_t>>();
                ref.frames.push_back(std::move(f));
            } else if (type == "total") {
                ref.totals.push_back(j.at("total"));
            }
        } catch (const Json::exception& e) {
            throw InputError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return ref;
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"barth-peters", "oguiso", "kumar", "kloosterman",
                                                   "apery-fermi"};
    return names;
}

Preset load_preset(const std::string& name) {
    auto& names = preset_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
        std::string list;
        for (auto& n : names) list += (list.empty() ? "" : ", ") + n;
        throw InputError("unknown preset " + name + " (known: " + list + ")");
    }
    Preset p;
    p.name = name;
    p.dir = std::string(K3F_DATA_DIR) + "/presets/" + name;
    p.T = read_lattice_file(p.dir + "/T.txt");
    p.seed = read_lattice_file(p.dir + "/seed.txt");
    if (fs::exists(p.dir + "/hodge.txt")) {
        int k = discriminant_form(p.T).q.rank();
        p.hodge = read_named_isometries(p.dir + "/hodge.txt", k);
    }
    if (fs::exists(p.dir + "/reference.jsonl")) p.reference = read_reference(p.dir + "/reference.jsonl");
    return p;
}

std::string normalize_roots(const std::string& symbol) {
    std::map<std::pair<char, int>, int> count;
    static const std::regex tok("([ADE])_?\\{?(\\d+)\\}?(?:\\^(\\d+))?");
    for (auto it = std::sregex_iterator(symbol.begin(), symbol.end(), tok); it != std::sregex_iterator(); ++it) {
        int e = (*it)[3].matched ? std::stoi((*it)[3]) : 1;
        count[{(*it)[1].str()[0], std::stoi((*it)[2])}] += e;
    }
    if (count.empty()) return "0";
    std::string out;
    for (auto& [k, e] : count) {
        if (!out.empty()) out += ' ';
        out += k.first + std::to_string(k.second);
        if (e > 1) out += "^" + std::to_string(e);
    }
    return out;
}

std::string normalize_mw(const std::string& mw) {
    std::string s;
    for (char c : mw)
        if (c != ' ') s += c;
    return s;
}

std::vector<int> match_frames(const std::vector<FrameReport>& frames, const Reference& ref) {
    std::vector<int> out(frames.size(), -1);
    std::vector<char> used(ref.frames.size(), 0);
    for (size_t i = 0; i < frames.size(); ++i) {
        const FrameReport& f = frames[i];
        for (size_t j = 0; j < ref.frames.size(); ++j) {
            const ReferenceFrame& r = ref.frames[j];
            if (used[j]) continue;
            if (normalize_roots(f.roots) == normalize_roots(r.roots) && normalize_mw(f.mw.str()) == normalize_mw(r.mw) &&
                f.root_count == r.root_count && f.aut_order == r.aut_order) {
                out[i] = int(j);
                used[j] = 1;
                break;
            }
        }
    }
    return out;
}

uint64_t discriminant_image_order(const GenusClass& W) {
    DiscriminantForm D = discriminant_form(W.lattice);
    return discriminant_image(D, W.aut.generators).order();
}

std::string lattice_record(const std::string& name, const Transcendental& T, size_t conjugacy_classes) {
    auto sig = signature(T.lattice());
    Json j;
    j["type"] = "lattice";
    j["name"] = name;
    j["rank"] = T.lattice().rank();
    j["signature"] = {sig.first, sig.second};
    j["gram"] = matrix_json(T.lattice().gram());
    j["discriminant_group"] = T.disc().q.d;
    j["orthogonal_group_order"] = T.group().order();
    j["conjugacy_classes"] = conjugacy_classes;
    return j.dump();
}

std::string genus_record(const GenusList& g) {
    Json j;
    j["type"] = "genus";
    j["rank"] = g.descriptor.rank();
    j["classes"] = g.classes.size();
    j["mass"] = g.mass.get_str();
    j["expected_mass"] = g.expected_mass.get_str();
    j["mass_ok"] = g.mass == g.expected_mass;
    j["primes"] = g.primes;
    return j.dump();
}

std::string class_record(const std::string& id, const GenusClass& W, uint64_t disc_image_order) {
    Json j;
    j["type"] = "class";
    j["id"] = id;
    j["file"] = id + ".txt";
    j["roots"] = W.roots.symbol();
    j["mw"] = W.mw.str();
    j["mw_group"] = mw_json(W.mw);
    j["root_count"] = W.roots.root_count;
    j["aut_order"] = W.aut.order.get_str();
    j["disc_image_order"] = disc_image_order;
    return j.dump();
}

std::string hodge_record(const HodgeChoice& h, const Transcendental& T) {
    Json j;
    j["type"] = "hodge";
    j["label"] = h.label;
    j["order"] = h.candidate.order;
    j["lift_order"] = h.candidate.lift_order;
    j["generator"] = isometry_json(T.group().element(h.candidate.generator));
    if (h.candidate.lift.rows() > 0) j["lift"] = matrix_json(h.candidate.lift);
    return j.dump();
}

std::string frame_record(const FrameReport& f, const std::string& reference_id) {
    Json j;
    j["type"] = "frame";
    j["id"] = f.id;
    if (!reference_id.empty()) j["reference_id"] = reference_id;
    j["roots"] = f.roots;
    j["mw"] = f.mw.str();
    j["root_count"] = f.root_count;
    j["aut_order"] = f.aut_order.get_str();
    j["disc_image_order"] = f.disc_image_order;
    j["multiplicities"] = f.multiplicities;
    return j.dump();
}

std::string total_record(const HodgeChoice& h, uint64_t total, const Bounds& b) {
    Json j;
    j["type"] = "total";
    j["label"] = h.label;
    j["hodge_order"] = h.candidate.order;
    j["total"] = total;
    j["lower"] = b.lower;
    j["upper"] = b.upper;
    return j.dump();
}

std::vector<ManifestLine> read_manifest(const std::string& path) {
    std::istringstream in(slurp(path));
    std::vector<ManifestLine> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            Json j = Json::parse(line);
            out.push_back({j.at("type").get<std::string>(), line});
        } catch (const Json::exception& e) {
            throw InputError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::string genus_cache_key(const GramLattice& seed) {
    std::ostringstream s;
    write_lattice(s, seed);
    std::ostringstream h;
    h << std::hex << fnv1a(s.str());
    return "genus-" + h.str();
}

GenusList enumerate_genus_cached(const GramLattice& seed, const WalkOptions& opt, const std::string& cache_dir,
                                 bool* hit) {
    if (hit) *hit = false;
    if (cache_dir.empty()) return enumerate_genus(seed, opt);
    fs::path file = fs::path(cache_dir) / (genus_cache_key(seed) + ".txt");
    if (fs::exists(file)) {
        try {
            std::istringstream in(slurp(file.string()));
            std::string word;
            GenusList g;
            g.descriptor = genus_descriptor(seed);
            g.expected_mass = mass(seed);
            size_t n = 0;
            in >> word;
            if (word != "primes") throw InputError("bad cache header");
            size_t np = 0;
            in >> np;
            g.primes.resize(np);
            for (auto& p : g.primes) in >> p;
            in >> word >> n;
            if (word != "classes" || !in) throw InputError("bad cache header");
            for (size_t c = 0; c < n; ++c) {
                int r = 0;
                in >> r;
                ZMat G(r, r);
                for (int i = 0; i < r; ++i)
                    for (int j = 0; j < r; ++j) in >> G(i, j);
                if (!in) throw InputError("truncated cache entry");
                GramLattice L(G);
                if (!in_genus(L, g.descriptor)) throw InputError("cached class outside the genus");
                g.classes.push_back(describe_class(L, opt.search));
                g.mass += Rat(1) / Rat(g.classes.back().aut.order);
            }
            if (g.mass == g.expected_mass) {
                sort_classes(g.classes);
                if (hit) *hit = true;
                if (opt.progress) opt.progress("genus loaded from cache " + file.string());
                return g;
            }
            if (opt.progress) opt.progress("cache entry " + file.string() + " fails the mass check, recomputing");
        } catch (const InputError& e) {
            if (opt.progress) opt.progress("ignoring cache entry " + file.string() + ": " + e.what());
        }
    }
    GenusList g = enumerate_genus(seed, opt);
    std::error_code ec;
    fs::create_directories(cache_dir, ec);
    fs::path tmp = file;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        out << "primes " << g.primes.size();
        for (long p : g.primes) out << ' ' << p;
        out << "\nclasses " << g.classes.size() << "\n";
        for (auto& c : g.classes) write_lattice(out, c.lattice);
    }
    fs::rename(tmp, file, ec);
    return g;
}

}  // namespace k3f

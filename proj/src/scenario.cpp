#include "enclosure/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace enclosure {

double RobinFields::gamma_on(int c) const {
    if (c >= 0 && c < static_cast<int>(gamma_by_component.size()) && gamma_by_component[c])
        return *gamma_by_component[c];
    return gamma;
}

double RobinFields::beta_on(int c) const {
    if (c >= 0 && c < static_cast<int>(beta_by_component.size()) && beta_by_component[c])
        return *beta_by_component[c];
    return beta;
}

bool RobinFields::gamma_zero() const {
    if (gamma != 0.0) return false;
    for (const auto& g : gamma_by_component)
        if (g && *g != 0.0) return false;
    return true;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

double Scenario::d() const {
    if (obstacle.empty()) throw Error(ErrorCode::EmptyObstacle, "scenario has no obstacle");
    return obstacle.signed_distance(source.p);
}

void Scenario::validate() const {
    auto bad = [](const std::string& m) { throw Error(ErrorCode::SchemaError, m); };
    if (!(source.eta > 0.0)) bad("source.radius must be positive");
    if (robin.gamma < 0.0) bad("robin.gamma must be non-negative");
    for (const auto& g : robin.gamma_by_component)
        if (g && *g < 0.0) bad("gamma must be non-negative");
    if (tau.points < 4) bad("tau.points must be at least 4");
    if (tau.tau_min < 0.0 || tau.tau_max < 0.0 || (tau.tau_min > 0.0 && tau.tau_max > 0.0 && tau.tau_min >= tau.tau_max))
        bad("tau range is invalid");
    if (mode == Mode::Solver && !(T > 0.0)) bad("time.final is required in solver mode");
    if (obstacle.empty()) return;
    for (const auto& c : obstacle.components)
        if (auto* s = std::get_if<Sphere>(&c); s && !(s->radius > 0.0)) bad("sphere radius must be positive");
    const double dd = d();
    if (dd <= source.eta)
        throw Error(ErrorCode::ObstacleTouchesSource, "closed source ball meets the closed obstacle");
    const double dist = dd - source.eta;
    if (R) {
        if (!(*R > source.eta)) bad("observation.radius must exceed source.radius");
        if (!(*R < dd)) bad("observation sphere must stay outside the obstacle");
    }
    if (T > 0.0) {
        double need = R ? 2.0 * dist - (*R - source.eta) : 2.0 * dist;
        if (!(T > need)) throw Error(ErrorCode::TimeTooShort, "time.final must exceed " + std::to_string(need));
    }
    if (!curvature_shifts.empty()) {
        if (curvature_shifts.size() != 2) bad("curvature shifts need exactly two values");
        double s1 = curvature_shifts[0], s2 = curvature_shifts[1];
        if (!(s1 > 0.0 && s1 < s2 && s2 < dist)) bad("curvature shifts must satisfy 0 < s1 < s2 < dist");
    }
}

std::vector<double> Scenario::tau_grid() const {
    double dt = obstacle.empty() ? 1.0 : dist();
    double lo = tau.tau_min > 0.0 ? tau.tau_min : 8.0 / dt;
    double hi = tau.tau_max > 0.0 ? tau.tau_max : (mode == Mode::JMode ? 960.0 / dt : 24.0 / dt);
    if (!(hi > lo)) throw Error(ErrorCode::InsufficientTauRange, "tau range is empty");
    std::vector<double> g;
    for (int i = 0; i < tau.points; ++i) {
        double s = static_cast<double>(i) / (tau.points - 1);
        g.push_back(tau.geometric ? lo * std::pow(hi / lo, s) : lo + (hi - lo) * s);
    }
    return g;
}

namespace {

std::string num(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

std::string list(const double* v, int n) {
    std::string s = "[";
    for (int i = 0; i < n; ++i) s += (i ? ", " : "") + num(v[i]);
    return s + "]";
}

std::string vec(const Vec3& v) { return list(v.data(), 3); }

}  // namespace

std::string Scenario::canonical() const {
    std::ostringstream o;
    o << "name = \"" << name << "\"\n";
    o << "mode = " << (mode == Mode::Solver ? "solver" : "j-mode") << "\n";
    o << "obstacle.count = " << obstacle.components.size() << "\n";
    o << "obstacle.regularity = " << (obstacle.regularity == Regularity::C3 ? "C3" : "C5") << "\n";
    if (obstacle.tube_radius > 0.0) o << "obstacle.tube_radius = " << num(obstacle.tube_radius) << "\n";
    for (std::size_t i = 0; i < obstacle.components.size(); ++i) {
        std::string pre = "obstacle." + std::to_string(i) + ".";
        const Component& c = obstacle.components[i];
        if (auto* s = std::get_if<Sphere>(&c)) {
            o << pre << "kind = sphere\n" << pre << "center = " << vec(s->center) << "\n";
            o << pre << "radius = " << num(s->radius) << "\n";
        } else if (auto* e = std::get_if<Ellipsoid>(&c)) {
            o << pre << "kind = ellipsoid\n" << pre << "center = " << vec(e->center) << "\n";
            o << pre << "semi_axes = " << vec(e->semi_axes) << "\n";
        } else {
            const auto& g = std::get<GraphPatch>(c);
            o << pre << "kind = patch\n" << pre << "q = " << vec(g.q) << "\n" << pre << "normal = " << vec(g.nu) << "\n";
            o << pre << "r_q = " << num(g.r_q) << "\n";
            double h[4] = {g.hess(0, 0), g.hess(0, 1), g.hess(1, 0), g.hess(1, 1)};
            o << pre << "hessian = " << list(h, 4) << "\n";
            o << pre << "h3 = " << list(g.h3.a.data(), 8) << "\n";
            o << pre << "h4 = " << list(g.h4.a.data(), 16) << "\n";
        }
        if (i < robin.gamma_by_component.size() && robin.gamma_by_component[i])
            o << pre << "gamma = " << num(*robin.gamma_by_component[i]) << "\n";
        if (i < robin.beta_by_component.size() && robin.beta_by_component[i])
            o << pre << "beta = " << num(*robin.beta_by_component[i]) << "\n";
    }
    o << "source.center = " << vec(source.p) << "\n";
    o << "source.radius = " << num(source.eta) << "\n";
    if (R) o << "observation.radius = " << num(*R) << "\n";
    if (T > 0.0) o << "time.final = " << num(T) << "\n";
    o << "robin.gamma = " << num(robin.gamma) << "\n";
    o << "robin.beta = " << num(robin.beta) << "\n";
    if (tau.tau_min > 0.0) o << "tau.min = " << num(tau.tau_min) << "\n";
    if (tau.tau_max > 0.0) o << "tau.max = " << num(tau.tau_max) << "\n";
    o << "tau.points = " << tau.points << "\n";
    o << "tau.spacing = " << (tau.geometric ? "geometric" : "linear") << "\n";
    if (grid.dx > 0.0) o << "grid.dx = " << num(grid.dx) << "\n";
    o << "grid.dt_factor = " << num(grid.dt_factor) << "\n";
    o << "grid.sphere_nodes = " << grid.sphere_nodes << "\n";
    if (fit.richardson_order > 0) o << "fit.richardson_order = " << fit.richardson_order << "\n";
    if (fit.noise_floor > 0.0) o << "fit.noise_floor = " << num(fit.noise_floor) << "\n";
    if (curvature_shifts.size() == 2)
        o << "curvature.s1 = " << num(curvature_shifts[0]) << "\ncurvature.s2 = " << num(curvature_shifts[1]) << "\n";
    return o.str();
}

std::string Scenario::hash() const {
    char b[20];
    std::snprintf(b, sizeof b, "%016llx", static_cast<unsigned long long>(fnv1a(canonical())));
    return b;
}

namespace {

struct Value {
    enum Kind { Number, Word, List } kind = Word;
    double number = 0.0;
    std::string word;
    std::vector<double> list;
    int line = 0;
};

[[noreturn]] void schema(int line, const std::string& m) {
    throw Error(ErrorCode::SchemaError, "line " + std::to_string(line) + ": " + m);
}

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    std::istringstream in(s);
    in.imbue(std::locale::classic());
    in >> out;
    return !in.fail() && in.peek() == std::char_traits<char>::eof();
}

std::map<std::string, Value> tokenize(const std::string& text) {
    std::map<std::string, Value> kv;
    std::istringstream in(text);
    std::string raw;
    int ln = 0;
    while (std::getline(in, raw)) {
        ++ln;
        bool quoted = false;
        std::string line;
        for (char c : raw) {
            if (c == '"') quoted = !quoted;
            if (c == '#' && !quoted) break;
            line += c;
        }
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) schema(ln, "expected key = value");
        std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        if (key.empty()) schema(ln, "empty key");
        if (kv.count(key)) schema(ln, "duplicate key " + key);
        Value v;
        v.line = ln;
        if (!val.empty() && val.front() == '[') {
            if (val.back() != ']') schema(ln, "unterminated list");
            std::string body = val.substr(1, val.size() - 2);
            for (char& c : body)
                if (c == ',') c = ' ';
            std::istringstream ls(body);
            ls.imbue(std::locale::classic());
            std::string tok;
            while (ls >> tok) {
                double x;
                if (!parse_number(tok, x)) schema(ln, "non-numeric list entry '" + tok + "'");
                v.list.push_back(x);
            }
            v.kind = Value::List;
        } else if (!val.empty() && val.front() == '"') {
            if (val.size() < 2 || val.back() != '"') schema(ln, "unterminated string");
            v.word = val.substr(1, val.size() - 2);
            v.kind = Value::Word;
        } else if (parse_number(val, v.number)) {
            v.kind = Value::Number;
        } else {
            if (val.empty()) schema(ln, "missing value for " + key);
            v.word = val;
            v.kind = Value::Word;
        }
        kv[key] = v;
    }
    return kv;
}

class Reader {
public:
    explicit Reader(std::map<std::string, Value> kv) : kv_(std::move(kv)) {}
    bool has(const std::string& k) const { return kv_.count(k) > 0; }
    double number(const std::string& k) {
        const Value& v = get(k);
        if (v.kind != Value::Number) schema(v.line, k + " must be a number");
        return v.number;
    }
    double number_or(const std::string& k, double dflt) { return has(k) ? number(k) : dflt; }
    std::string word(const std::string& k) {
        const Value& v = get(k);
        if (v.kind != Value::Word) schema(v.line, k + " must be a word or string");
        return v.word;
    }
    std::vector<double> list(const std::string& k, std::size_t n) {
        const Value& v = get(k);
        if (v.kind != Value::List || (n && v.list.size() != n))
            schema(v.line, k + " must be a list of " + std::to_string(n) + " numbers");
        return v.list;
    }
    Vec3 vec3(const std::string& k) {
        auto l = list(k, 3);
        return {l[0], l[1], l[2]};
    }
    void finish() const {
        for (const auto& [k, v] : kv_)
            if (!used_.count(k)) schema(v.line, "unknown key " + k);
    }

private:
    const Value& get(const std::string& k) {
        auto it = kv_.find(k);
        if (it == kv_.end()) throw Error(ErrorCode::SchemaError, "missing key " + k);
        used_.insert(k);
        return it->second;
    }
    std::map<std::string, Value> kv_;
    std::set<std::string> used_;
};

Component read_component(Reader& r, const std::string& pre) {
    std::string kind = r.word(pre + "kind");
    if (kind == "sphere") return Sphere{r.vec3(pre + "center"), r.number(pre + "radius")};
    if (kind == "ellipsoid") {
        Ellipsoid e{r.vec3(pre + "center"), r.vec3(pre + "semi_axes")};
        if ((e.semi_axes.array() <= 0.0).any()) throw Error(ErrorCode::SchemaError, "semi axes must be positive");
        return e;
    }
    if (kind == "patch") {
        Vec3 q = r.vec3(pre + "q"), nu = r.vec3(pre + "normal");
        double rq = r.number(pre + "r_q");
        auto h = r.list(pre + "hessian", 4);
        Mat2 hs;
        hs << h[0], h[1], h[2], h[3];
        Tensor3 t3;
        Tensor4 t4;
        if (r.has(pre + "h3")) {
            auto l = r.list(pre + "h3", 8);
            std::copy(l.begin(), l.end(), t3.a.begin());
        }
        if (r.has(pre + "h4")) {
            auto l = r.list(pre + "h4", 16);
            std::copy(l.begin(), l.end(), t4.a.begin());
        }
        GraphPatch g = make_taylor_patch(q, nu, rq, hs, t3, t4);
        g.validate(1e-9);
        return g;
    }
    throw Error(ErrorCode::SchemaError, "unknown obstacle kind " + kind);
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
    Reader r(tokenize(text));
    Scenario sc;
    if (r.has("name")) sc.name = r.word("name");
    if (r.has("mode")) {
        std::string m = r.word("mode");
        if (m == "solver") sc.mode = Mode::Solver;
        else if (m == "j-mode" || m == "jmode") sc.mode = Mode::JMode;
        else throw Error(ErrorCode::SchemaError, "mode must be solver or j-mode");
    }
    std::vector<std::string> prefixes;
    if (r.has("obstacle.count")) {
        int n = static_cast<int>(r.number("obstacle.count"));
        for (int i = 0; i < n; ++i) prefixes.push_back("obstacle." + std::to_string(i) + ".");
    } else if (r.has("obstacle.kind") || r.has("obstacle.0.kind")) {
        if (r.has("obstacle.kind")) {
            // single component written without an index; peek without consuming
            prefixes.push_back("obstacle.");
        }
    }
    for (const auto& pre : prefixes) {
        if (pre == "obstacle." && r.word("obstacle.kind") == "none") break;
        sc.obstacle.components.push_back(read_component(r, pre));
        std::optional<double> g, b;
        if (r.has(pre + "gamma")) g = r.number(pre + "gamma");
        if (r.has(pre + "beta")) b = r.number(pre + "beta");
        sc.robin.gamma_by_component.push_back(g);
        sc.robin.beta_by_component.push_back(b);
    }
    if (r.has("obstacle.regularity")) {
        std::string reg = r.word("obstacle.regularity");
        if (reg == "C3") sc.obstacle.regularity = Regularity::C3;
        else if (reg == "C5") sc.obstacle.regularity = Regularity::C5;
        else throw Error(ErrorCode::SchemaError, "obstacle.regularity must be C3 or C5");
    }
    sc.obstacle.tube_radius = r.number_or("obstacle.tube_radius", 0.0);
    sc.source.p = r.vec3("source.center");
    sc.source.eta = r.number("source.radius");
    if (r.has("observation.radius")) sc.R = r.number("observation.radius");
    sc.T = r.number_or("time.final", 0.0);
    sc.robin.gamma = r.number_or("robin.gamma", 0.0);
    sc.robin.beta = r.number_or("robin.beta", 0.0);
    sc.tau.tau_min = r.number_or("tau.min", 0.0);
    sc.tau.tau_max = r.number_or("tau.max", 0.0);
    sc.tau.points = static_cast<int>(r.number_or("tau.points", 16));
    if (r.has("tau.spacing")) {
        std::string s = r.word("tau.spacing");
        if (s != "geometric" && s != "linear") throw Error(ErrorCode::SchemaError, "tau.spacing must be geometric or linear");
        sc.tau.geometric = s == "geometric";
    }
    sc.grid.dx = r.number_or("grid.dx", 0.0);
    sc.grid.dt_factor = r.number_or("grid.dt_factor", 0.45);
    sc.grid.sphere_nodes = static_cast<int>(r.number_or("grid.sphere_nodes", 16));
    sc.fit.richardson_order = static_cast<int>(r.number_or("fit.richardson_order", 0));
    sc.fit.noise_floor = r.number_or("fit.noise_floor", 0.0);
    if (r.has("curvature.s1") || r.has("curvature.s2"))
        sc.curvature_shifts = {r.number("curvature.s1"), r.number("curvature.s2")};
    r.finish();
    if (!(sc.grid.dt_factor > 0.0) || sc.grid.dt_factor > 0.9 / std::sqrt(3.0))
        throw Error(ErrorCode::CflViolation, "grid.dt_factor must lie in (0, 0.9/sqrt(3)]");
    sc.validate();
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open scenario " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return parse_scenario(s.str());
}

}  // namespace enclosure

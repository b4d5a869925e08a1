#include "phi4/harness.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <numbers>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "phi4/bddv.hpp"
#include "phi4/newton.hpp"
#include "phi4/reference.hpp"

namespace phi4 {

namespace fs = std::filesystem;

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const char* first = v.data();
    const char* last = v.data() + v.size();
    auto [p, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || p != last)
        throw ConfigError("invalid number for '" + key + "': '" + v + "'");
    return out;
}

long to_long(const std::string& key, const std::string& v) {
    long out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw ConfigError("invalid integer for '" + key + "': '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError("invalid boolean for '" + key + "': '" + v + "'");
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::general, 17);
    return std::string(buf.data(), p);
}

double row_duration(const GridSpec& g) { return g.row_time(1); }

long last_row(const RunConfig& cfg, const GridSpec& g) {
    const double t_end = cfg.duration_over_l * cfg.length;
    return static_cast<long>(std::ceil(t_end / row_duration(g) - 1e-9));
}

// Exact solution for the configured initial data, when one is known.
std::optional<std::function<double(double, double)>> exact_solution(const RunConfig& cfg) {
    if (cfg.initial == InitialShape::cn) {
        const CnSolution sol = CnSolution::make(cfg.amplitude, cfg.potential);
        return [sol](double, double t) { return cn_value(sol, t); };
    }
    const double k = 2.0 * std::numbers::pi / cfg.length;
    if (cfg.potential.lambda == 0.0 && k * k + cfg.potential.r >= 0.0) {
        const double a = cfg.amplitude, l = cfg.length, r = cfg.potential.r;
        return [a, l, r](double x, double t) { return linear_mode(a, l, x, t, r); };
    }
    return std::nullopt;
}

InitialData initial_data(const RunConfig& cfg) {
    if (cfg.initial == InitialShape::cn) return InitialData::homogeneous(cfg.amplitude);
    return InitialData::sine(cfg.amplitude, cfg.length);
}

class Collector {
public:
    Collector(const RunConfig& cfg, const GridSpec& grid, RunResult& out)
        : cfg_(cfg), grid_(grid), out_(out), exact_(exact_solution(cfg)), last_(last_row(cfg, grid)) {}

    long last() const { return last_; }

    void add(DiagnosticsRecord d, const Row& phi) {
        peaks_.update(d);
        out_.energy_series.push_back(d.energy);
        if (!have_ref_) {
            q0_ref_ = d.q0;
            q1_ref_ = d.q1;
            have_ref_ = true;
        }
        const bool first = !recorded_;
        recorded_ = true;
        if (!(first || d.row % cfg_.record_every == 0 || d.row == last_)) return;
        RunRecord r;
        r.d = d;
        const double e = std::abs(q0_ref_);
        r.dq0_rel = e > 0.0 ? std::abs(d.q0 - q0_ref_) / e : 0.0;
        r.dq1_rel = e > 0.0 ? std::abs(d.q1 - q1_ref_) / e : 0.0;
        r.ref_err = nan;
        if (exact_) {
            double m = 0.0;
            for (std::size_t j = 0; j < phi.size(); ++j)
                m = std::max(m, std::abs(phi[j] - (*exact_)(grid_.site_position(d.row, j), d.time)));
            r.ref_err = m;
        }
        out_.records.push_back(r);
    }

    void snapshot(long row, const Row& phi) {
        if (cfg_.snapshot_every <= 0 || row % cfg_.snapshot_every != 0 || row > last_) return;
        Snapshot s{row, grid_.row_time(row), Row(phi.size()), phi};
        for (std::size_t j = 0; j < phi.size(); ++j) s.x[j] = grid_.site_position(row, j);
        out_.snapshots.push_back(std::move(s));
    }

    void fail(long row, bool diverged) {
        RunRecord r;
        r.d.row = row;
        r.d.time = grid_.row_time(row);
        r.d.energy = r.d.energy_plus = r.d.energy_minus = r.d.q0 = r.d.q1 = nan;
        r.d.eps0_max = r.d.eps1_max = nan;
        r.d.eps0_peak = nan;
        r.d.eps1_peak = nan;
        r.d.parity = grid_.family == LatticeFamily::lightcone ? row_parity(row) : 0;
        r.d.diverged = diverged;
        r.dq0_rel = r.dq1_rel = r.ref_err = nan;
        out_.records.push_back(r);
    }

private:
    const RunConfig& cfg_;
    const GridSpec& grid_;
    RunResult& out_;
    std::optional<std::function<double(double, double)>> exact_;
    long last_;
    bool recorded_ = false;
    PeakTracker peaks_;
    double q0_ref_ = 0.0, q1_ref_ = 0.0;
    bool have_ref_ = false;
};

void simulate_newton(const RunConfig& cfg, const GridSpec& g, Collector& col) {
    NewtonState s = newton_init(initial_data(cfg), g, cfg.potential);
    s.overflow = cfg.overflow;
    col.snapshot(0, s.rows.prev);
    col.snapshot(1, s.rows.curr);
    Row before = s.rows.prev;
    for (long n = 2; n <= col.last() + 1; ++n) {
        NewtonState nx = newton_step(s);
        col.snapshot(n, nx.rows.curr);
        col.add(newton_record(before, s.rows.curr, nx.rows.curr, n - 1, g, cfg.potential),
                s.rows.curr);
        before = s.rows.curr;
        s = std::move(nx);
    }
}

void simulate_bddv(const RunConfig& cfg, const GridSpec& g, Collector& col) {
    BddvState s = bddv_init(initial_data(cfg), g, cfg.potential);
    s.overflow = cfg.overflow;
    col.snapshot(0, s.rows.prev);
    col.snapshot(1, s.rows.curr);
    Row before = s.rows.prev;
    for (long n = 2; n <= col.last() + 1; ++n) {
        BddvState nx = bddv_step(s);
        col.snapshot(n, nx.rows.curr);
        col.add(bddv_record(before, s.rows.curr, nx.rows.curr, n - 1, g, cfg.potential),
                s.rows.curr);
        before = s.rows.curr;
        s = std::move(nx);
    }
}

void simulate_msilcc(const RunConfig& cfg, const GridSpec& g, Collector& col, SolverStats& stats) {
    MsilccState s = msilcc_init(initial_data(cfg), g, cfg.potential, cfg.solver);
    std::deque<ZetaRow> ring{s.prev, s.curr};
    col.snapshot(0, s.prev.phi);
    col.snapshot(1, s.curr.phi);
    for (long n = 2; n <= col.last() + 2; ++n) {
        s = msilcc_step(s);
        stats = s.stats;
        col.snapshot(n, s.curr.phi);
        ring.push_back(s.curr);
        if (ring.size() > 5) ring.pop_front();
        if (ring.size() == 5) {
            const ZetaWindow w{&ring[0], &ring[1], &ring[2], &ring[3], &ring[4]};
            col.add(msilcc_record(w, g, cfg.potential), ring[2].phi);
        }
    }
    stats = s.stats;
}

void simulate_midpoint(const RunConfig& cfg, Collector& col, const GridSpec& g) {
    MechState s{cfg.amplitude, 0.0};
    const double d = g.delta;
    for (long n = 1; n <= col.last(); ++n) {
        s = midpoint_step_mech(s, d, cfg.potential, cfg.solver);
        if (!std::isfinite(s.q) || std::abs(s.q) > cfg.overflow) throw DivergenceError(n, 0, s.q);
        DiagnosticsRecord r;
        r.row = n;
        r.time = g.row_time(n);
        r.energy = r.energy_plus = r.energy_minus = r.q0 =
            0.5 * s.p * s.p + potential_value(s.q, cfg.potential);
        r.q1 = 0.0;
        r.parity = 0;
        col.add(r, Row{s.q});
    }
}

void set_threads(int threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

void ensure_writable(const fs::path& p, bool force) {
    if (fs::exists(p) && !force)
        throw IoError("refusing to overwrite existing file " + p.string() + " (use --force)");
}

void write_file(const fs::path& p, bool force, const std::function<void(std::ostream&)>& body) {
    ensure_writable(p, force);
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + p.string() + " for writing");
    body(os);
    os.flush();
    if (!os) throw IoError("write failed for " + p.string());
}

nlohmann::json config_json(const RunConfig& c) {
    return {{"scheme", to_string(c.scheme)},
            {"initial", to_string(c.initial)},
            {"amplitude", c.amplitude},
            {"r", c.potential.r},
            {"lambda", c.potential.lambda},
            {"r_tilde", c.potential.r_tilde},
            {"lambda_tilde", c.potential.lambda_tilde},
            {"sites", c.n_sites},
            {"length", c.length},
            {"duration", c.duration_over_l},
            {"record_every", c.record_every},
            {"snapshot_every", c.snapshot_every},
            {"tol", c.solver.tol_residual},
            {"max_iter", c.solver.max_iter},
            {"damping", c.solver.lm_damping_init},
            {"overflow", c.overflow}};
}

std::string status_name(RunStatus s) {
    switch (s) {
        case RunStatus::clean: return "clean";
        case RunStatus::diverged: return "diverged";
        case RunStatus::solver_failure: return "solver_failure";
    }
    return "unknown";
}

}  // namespace

Scheme parse_scheme(const std::string& s) {
    if (s == "newton") return Scheme::newton;
    if (s == "bddv") return Scheme::bddv;
    if (s == "msilcc") return Scheme::msilcc;
    if (s == "midpoint0d") return Scheme::midpoint0d;
    throw ConfigError("unknown scheme '" + s + "'");
}

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::newton: return "newton";
        case Scheme::bddv: return "bddv";
        case Scheme::msilcc: return "msilcc";
        case Scheme::midpoint0d: return "midpoint0d";
    }
    return "unknown";
}

InitialShape parse_initial(const std::string& s) {
    if (s == "sine") return InitialShape::sine;
    if (s == "cn") return InitialShape::cn;
    throw ConfigError("unknown initial data '" + s + "'");
}

std::string to_string(InitialShape s) { return s == InitialShape::sine ? "sine" : "cn"; }

OutputFormat parse_format(const std::string& s) {
    if (s == "csv") return OutputFormat::csv;
    if (s == "json") return OutputFormat::json;
    throw ConfigError("unknown format '" + s + "'");
}

void RunConfig::validate() const {
    potential.validate();
    solver.validate();
    if (!std::isfinite(amplitude)) throw ConfigError("amplitude must be finite");
    if (!(duration_over_l > 0.0)) throw ConfigError("duration must be positive");
    if (record_every < 1) throw ConfigError("record-every must be at least 1");
    if (snapshot_every < 0) throw ConfigError("snapshot-every must be non-negative");
    if (!(overflow > 0.0)) throw ConfigError("overflow bound must be positive");
    if (threads < 0) throw ConfigError("threads must be non-negative");
    (void)grid();
    if (initial == InitialShape::cn) (void)CnSolution::make(amplitude, potential);
}

GridSpec RunConfig::grid() const {
    if (scheme == Scheme::newton || scheme == Scheme::midpoint0d)
        return GridSpec::aligned(n_sites, length);
    return GridSpec::lightcone(n_sites, length);
}

void apply_setting(RunConfig& c, const std::string& key, const std::string& v) {
    if (key == "scheme") c.scheme = parse_scheme(v);
    else if (key == "initial") c.initial = parse_initial(v);
    else if (key == "amplitude") c.amplitude = to_double(key, v);
    else if (key == "r") c.potential.r = to_double(key, v);
    else if (key == "lambda") c.potential.lambda = to_double(key, v);
    else if (key == "r-tilde") c.potential.r_tilde = to_double(key, v);
    else if (key == "lambda-tilde") c.potential.lambda_tilde = to_double(key, v);
    else if (key == "sites") {
        const long n = to_long(key, v);
        if (n < 0) throw ConfigError("sites must be positive");
        c.n_sites = static_cast<std::size_t>(n);
    } else if (key == "length") c.length = to_double(key, v);
    else if (key == "duration") c.duration_over_l = to_double(key, v);
    else if (key == "record-every") c.record_every = to_long(key, v);
    else if (key == "snapshot-every") c.snapshot_every = to_long(key, v);
    else if (key == "tol") c.solver.tol_residual = to_double(key, v);
    else if (key == "max-iter") c.solver.max_iter = static_cast<int>(to_long(key, v));
    else if (key == "damping") c.solver.lm_damping_init = to_double(key, v);
    else if (key == "overflow") c.overflow = to_double(key, v);
    else if (key == "threads") c.threads = static_cast<int>(to_long(key, v));
    else if (key == "out") c.out = v;
    else if (key == "format") c.format = parse_format(v);
    else if (key == "force") c.force = to_bool(key, v);
    else throw ConfigError("unknown setting '" + key + "'");
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file " + path);
    std::map<std::string, std::string> out;
    std::string line;
    int no = 0;
    while (std::getline(is, line)) {
        ++no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(no) + ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        while (!key.empty() && key.front() == '-') key.erase(key.begin());
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(path + ":" + std::to_string(no) + ": empty key");
        RunConfig probe;
        try {
            if (key != "preset") apply_setting(probe, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(path + ":" + std::to_string(no) + ": " + e.what());
        }
        out[key] = value;
    }
    return out;
}

RunResult simulate(const RunConfig& cfg) {
    cfg.validate();
    set_threads(cfg.threads);
    const auto t0 = std::chrono::steady_clock::now();
    const GridSpec g = cfg.grid();
    RunResult out;
    out.config = cfg;
    out.exact_energy = cfg.initial == InitialShape::cn
                           ? cfg.length * potential_value(cfg.amplitude, cfg.potential)
                           : exact_initial_energy(cfg.amplitude, cfg.length, cfg.potential);
    Collector col(cfg, g, out);
    try {
        switch (cfg.scheme) {
            case Scheme::newton: simulate_newton(cfg, g, col); break;
            case Scheme::bddv: simulate_bddv(cfg, g, col); break;
            case Scheme::msilcc: simulate_msilcc(cfg, g, col, out.stats); break;
            case Scheme::midpoint0d: simulate_midpoint(cfg, col, g); break;
        }
    } catch (const DivergenceError& e) {
        out.status = RunStatus::diverged;
        out.message = e.what();
        col.fail(e.row, true);
    } catch (const SolverError& e) {
        out.status = RunStatus::solver_failure;
        out.message = e.what();
        col.fail(e.row, false);
    }
    out.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

int exit_code(RunStatus s) {
    switch (s) {
        case RunStatus::clean: return 0;
        case RunStatus::diverged: return 3;
        case RunStatus::solver_failure: return 4;
    }
    return 4;
}

void write_csv(std::ostream& os, const RunResult& r) {
    const double l = r.config.length;
    os << "row,t_over_L,E,E_plus,E_minus,Q0,Q1,eps0_max,eps1_max,eps0_peak,eps1_peak,parity,"
          "diverged,dQ0_rel,dQ1_rel,ref_err\n";
    for (const RunRecord& x : r.records) {
        const DiagnosticsRecord& d = x.d;
        os << d.row << ',' << fmt(d.time / l) << ',' << fmt(d.energy) << ',' << fmt(d.energy_plus)
           << ',' << fmt(d.energy_minus) << ',' << fmt(d.q0) << ',' << fmt(d.q1) << ','
           << fmt(d.eps0_max) << ',' << fmt(d.eps1_max) << ',' << fmt(d.eps0_peak) << ','
           << fmt(d.eps1_peak) << ',' << d.parity << ',' << (d.diverged ? 1 : 0) << ','
           << fmt(x.dq0_rel) << ',' << fmt(x.dq1_rel) << ',' << fmt(x.ref_err) << '\n';
    }
}

void write_json(std::ostream& os, const RunResult& r) {
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
    nlohmann::json rows = nlohmann::json::array();
    for (const RunRecord& x : r.records) {
        const DiagnosticsRecord& d = x.d;
        rows.push_back({{"row", d.row},
                        {"t_over_L", num(d.time / r.config.length)},
                        {"E", num(d.energy)},
                        {"E_plus", num(d.energy_plus)},
                        {"E_minus", num(d.energy_minus)},
                        {"Q0", num(d.q0)},
                        {"Q1", num(d.q1)},
                        {"eps0_max", num(d.eps0_max)},
                        {"eps1_max", num(d.eps1_max)},
                        {"eps0_peak", num(d.eps0_peak)},
                        {"eps1_peak", num(d.eps1_peak)},
                        {"parity", d.parity},
                        {"diverged", d.diverged},
                        {"dQ0_rel", num(x.dq0_rel)},
                        {"dQ1_rel", num(x.dq1_rel)},
                        {"ref_err", num(x.ref_err)}});
    }
    nlohmann::json j = {{"config", config_json(r.config)},
                        {"status", status_name(r.status)},
                        {"message", r.message},
                        {"exact_energy", r.exact_energy},
                        {"records", rows}};
    os << j.dump(1) << '\n';
}

void write_metadata(std::ostream& os, const RunResult& r) {
    const GridSpec g = r.config.grid();
    nlohmann::json j = {
        {"config", config_json(r.config)},
        {"grid",
         {{"family", g.family == LatticeFamily::aligned ? "aligned" : "lightcone"},
          {"sites", g.n_sites},
          {"delta", g.delta},
          {"length", g.length}}},
        {"status", status_name(r.status)},
        {"message", r.message},
        {"exact_energy", r.exact_energy},
        {"solver_stats",
         {{"total_iterations", r.stats.total_iterations},
          {"max_cell_iterations", r.stats.max_cell_iterations},
          {"cells_solved", r.stats.cells_solved}}},
        {"runtime_seconds", r.runtime_seconds}};
    os << j.dump(1) << '\n';
}

void write_snapshots_csv(std::ostream& os, const std::vector<RunResult>& runs) {
    os << "amplitude,row,t_over_L,x_over_L,phi\n";
    for (const RunResult& r : runs) {
        const double l = r.config.length;
        for (const Snapshot& s : r.snapshots)
            for (std::size_t j = 0; j < s.x.size(); ++j)
                os << fmt(r.config.amplitude) << ',' << s.row << ',' << fmt(s.time / l) << ','
                   << fmt(s.x[j] / l) << ',' << fmt(s.phi[j]) << '\n';
    }
}

int run(const RunConfig& cfg, std::ostream& log) {
    if (cfg.out.empty()) throw ConfigError("an output path is required (--out)");
    const fs::path out(cfg.out);
    fs::path meta = out;
    meta.replace_extension(".meta.json");
    // refuse before spending time on the integration
    ensure_writable(out, cfg.force);
    if (cfg.format == OutputFormat::csv) ensure_writable(meta, cfg.force);
    const RunResult r = simulate(cfg);
    if (cfg.format == OutputFormat::csv) {
        write_file(out, cfg.force, [&](std::ostream& os) { write_csv(os, r); });
        write_file(meta, cfg.force, [&](std::ostream& os) { write_metadata(os, r); });
    } else {
        write_file(out, cfg.force, [&](std::ostream& os) { write_json(os, r); });
    }
    if (r.status != RunStatus::clean) log << r.message << '\n';
    return exit_code(r.status);
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"energy-vs-time", "error-vs-amplitude",
                                                "error-vs-time",  "r-scan",
                                                "jacobi-compare", "field-snapshots"};
    return names;
}

std::vector<double> log_grid(double lo, double hi, int per_decade) {
    const double decades = std::log10(hi / lo);
    const int n = static_cast<int>(std::lround(decades * per_decade));
    std::vector<double> out;
    for (int i = 0; i <= n; ++i) out.push_back(lo * std::pow(10.0, decades * i / n));
    return out;
}

PresetPlan preset(const std::string& name, const RunConfig& base) {
    PresetPlan plan{name, {}};
    auto member = [&](Scheme s, double a, double duration) {
        RunConfig c = base;
        c.scheme = s;
        c.amplitude = a;
        c.duration_over_l = duration;
        c.initial = InitialShape::sine;
        c.snapshot_every = 0;
        return c;
    };
    const std::array<Scheme, 3> all{Scheme::newton, Scheme::bddv, Scheme::msilcc};
    if (name == "energy-vs-time") {
        for (Scheme s : all) {
            RunConfig c = member(s, 10.0, 100.0);
            c.record_every = 16;
            plan.runs.push_back(c);
        }
    } else if (name == "error-vs-amplitude") {
        for (double a : log_grid(0.1, 100.0, 32))
            for (Scheme s : all) {
                RunConfig c = member(s, a, 1.0);
                c.record_every = 1 << 20;
                plan.runs.push_back(c);
            }
    } else if (name == "error-vs-time") {
        for (Scheme s : all) {
            RunConfig c = member(s, 10.0, 100.0);
            c.record_every = 256;
            plan.runs.push_back(c);
        }
    } else if (name == "r-scan") {
        std::vector<double> rs;
        for (double r : log_grid(0.1, 100.0, 32)) rs.push_back(-r);
        std::reverse(rs.begin(), rs.end());
        for (int i = -9; i <= 9; ++i) rs.push_back(0.01 * i);
        for (double r : log_grid(0.1, 100.0, 32)) rs.push_back(r);
        for (double r : rs) {
            RunConfig c = member(Scheme::msilcc, 10.0, 1.0);
            c.potential.r = r;
            c.record_every = 1 << 20;
            plan.runs.push_back(c);
        }
    } else if (name == "jacobi-compare") {
        for (Scheme s : all) {
            RunConfig c = member(s, 1.0, 1.0);
            c.initial = InitialShape::cn;
            c.record_every = 4;
            plan.runs.push_back(c);
        }
    } else if (name == "field-snapshots") {
        for (double a : {0.1, 1.0, 3.0, 10.0}) {
            RunConfig c = member(Scheme::msilcc, a, 1.0);
            c.record_every = 1 << 20;
            // eight snapshots per period on the light-cone lattice
            c.snapshot_every = static_cast<long>(2 * c.n_sites / 8);
            plan.runs.push_back(c);
        }
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    return plan;
}

Histogram normalized_histogram(const std::vector<double>& values, double lo, double hi, int bins) {
    Histogram h{lo, hi, std::vector<std::uint64_t>(static_cast<std::size_t>(bins), 0), 0, 0};
    if (values.empty()) return h;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    for (double v : values) {
        const double x = v / mean;
        if (x < lo) {
            ++h.below;
        } else if (x > hi) {
            ++h.above;
        } else {
            auto k = static_cast<std::size_t>((x - lo) / (hi - lo) * bins);
            h.counts[std::min(k, h.counts.size() - 1)]++;
        }
    }
    return h;
}

int run_preset(const std::string& name, const RunConfig& base, std::ostream& log) {
    if (base.out.empty()) throw ConfigError("an output directory is required (--out)");
    const PresetPlan plan = preset(name, base);
    for (const RunConfig& c : plan.runs) c.validate();
    const fs::path dir(base.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string());

    std::vector<RunResult> results;
    results.reserve(plan.runs.size());
    for (const RunConfig& c : plan.runs) {
        results.push_back(simulate(c));
        if (results.back().status != RunStatus::clean)
            log << name << ": " << to_string(c.scheme) << " A=" << c.amplitude << " r=" << c.potential.r
                << ": " << results.back().message << '\n';
    }

    auto peak = [](const RunResult& r, bool second) {
        double m = 0.0;
        for (const RunRecord& x : r.records) {
            const double v = second ? x.d.eps1_peak : x.d.eps0_peak;
            if (std::isfinite(v)) m = std::max(m, v);
        }
        return m;
    };
    auto energy_dev = [](const RunResult& r) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo, mean = 0.0;
        for (double e : r.energy_series) {
            lo = std::min(lo, e);
            hi = std::max(hi, e);
            mean += e;
        }
        if (r.energy_series.empty()) return nan;
        mean /= static_cast<double>(r.energy_series.size());
        return mean != 0.0 ? (hi - lo) / std::abs(mean) : 0.0;
    };
    auto ref_max = [](const RunResult& r) {
        double m = nan;
        for (const RunRecord& x : r.records)
            if (std::isfinite(x.ref_err)) m = std::isnan(m) ? x.ref_err : std::max(m, x.ref_err);
        return m;
    };
    auto summary_header =
        "scheme,amplitude,r,status,eps0_peak,eps1_peak,energy_rel_range,ref_err_max,t_over_L_end\n";
    auto summary_row = [&](std::ostream& os, const RunResult& r) {
        const double t_end = r.records.empty() ? 0.0 : r.records.back().d.time / r.config.length;
        os << to_string(r.config.scheme) << ',' << fmt(r.config.amplitude) << ','
           << fmt(r.config.potential.r) << ',' << status_name(r.status) << ',' << fmt(peak(r, false))
           << ',' << fmt(peak(r, true)) << ',' << fmt(energy_dev(r)) << ',' << fmt(ref_max(r)) << ','
           << fmt(t_end) << '\n';
    };

    auto per_run = [&](const std::string& stem) {
        for (const RunResult& r : results)
            write_file(dir / (stem + "-" + to_string(r.config.scheme) + ".csv"), base.force,
                       [&](std::ostream& os) { write_csv(os, r); });
    };

    if (name == "energy-vs-time") {
        per_run(name);
        for (const RunResult& r : results) {
            if (r.config.scheme != Scheme::msilcc) continue;
            const Histogram h = normalized_histogram(r.energy_series, 0.999, 1.001, 128);
            write_file(dir / (name + "-histogram.csv"), base.force, [&](std::ostream& os) {
                os << "bin_lo,bin_hi,count\n";
                const double w = (h.hi - h.lo) / static_cast<double>(h.counts.size());
                for (std::size_t k = 0; k < h.counts.size(); ++k)
                    os << fmt(h.lo + w * static_cast<double>(k)) << ','
                       << fmt(h.lo + w * static_cast<double>(k + 1)) << ',' << h.counts[k] << '\n';
            });
        }
    } else if (name == "error-vs-time" || name == "jacobi-compare") {
        per_run(name);
    } else if (name == "field-snapshots") {
        write_file(dir / (name + ".csv"), base.force,
                   [&](std::ostream& os) { write_snapshots_csv(os, results); });
    }
    write_file(dir / (name + "-summary.csv"), base.force, [&](std::ostream& os) {
        os << summary_header;
        for (const RunResult& r : results) summary_row(os, r);
    });
    return 0;
}

}  // namespace phi4

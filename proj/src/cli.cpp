#include "sww/cli.hpp"

#include "sww/verify.hpp"

#include <boost/crc.hpp>
#include <fmt/format.h>

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace sww {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* mode_name(InversionMode m) { return m == InversionMode::Direct ? "direct" : "pipeline"; }

template <typename T>
void read_scalar_or_list(const json& j, const char* key, std::vector<T>& out)
{
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    out.clear();
    if (v.is_array())
        for (const json& x : v) out.push_back(x.get<T>());
    else
        out.push_back(v.get<T>());
}

}  // namespace

void RunConfig::validate() const
{
    if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
    if (eps.empty()) throw ConfigError("eps must list at least one value");
    for (double e : eps) {
        if (!(e >= 0.0)) throw ConfigError("eps must be non-negative");
        if (e > 0.05) throw ConfigError(fmt::format("eps = {} is above the small-amplitude guard 0.05", e));
    }
    if (xi.empty()) throw ConfigError("xi must list at least one value");
    for (double x : xi)
        if (!(x > 0.0)) throw ConfigError("xi must be positive");
    if (L_max < 4 || J_max < 4) throw ConfigError("L_max and J_max must be at least 4");
    if (sigma <= 0) throw ConfigError("sigma must be positive");
    if (!(tol > 0.0)) throw ConfigError("tol must be positive");
    if (grid < 2) throw ConfigError("grid must be at least 2");
    if (samples <= 0 || measure_J_max < 2) throw ConfigError("samples and measure_J_max must be positive");
    if (threads < 1) throw ConfigError("threads must be at least 1");
}

std::string RunConfig::canonical_json() const
{
    json j;
    j["kappa"] = kappa;
    j["eps"] = eps;
    j["xi"] = xi;
    j["L_max"] = L_max;
    j["J_max"] = J_max;
    j["sigma"] = sigma;
    j["tol"] = tol;
    j["mode"] = mode_name(mode);
    j["grid"] = grid;
    j["samples"] = samples;
    j["measure_J_max"] = measure_J_max;
    j["seed"] = seed;
    return j.dump();
}

RunConfig config_from_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::set<std::string> known{"kappa", "eps",     "xi",   "L_max", "J_max",         "sigma", "tol",
                                             "mode",  "grid",    "samples", "measure_J_max", "out", "threads", "seed"};
    for (const auto& [k, v] : j.items())
        if (!known.count(k)) throw ConfigError("unknown config key '" + k + "'");
    RunConfig c;
    try {
        c.kappa = j.value("kappa", c.kappa);
        read_scalar_or_list(j, "eps", c.eps);
        read_scalar_or_list(j, "xi", c.xi);
        c.L_max = j.value("L_max", c.L_max);
        c.J_max = j.value("J_max", c.J_max);
        c.sigma = j.value("sigma", c.sigma);
        c.tol = j.value("tol", c.tol);
        c.grid = j.value("grid", c.grid);
        c.samples = j.value("samples", c.samples);
        c.measure_J_max = j.value("measure_J_max", c.measure_J_max);
        c.out = j.value("out", c.out);
        c.threads = j.value("threads", c.threads);
        c.seed = j.value("seed", c.seed);
        const std::string m = j.value("mode", std::string(mode_name(c.mode)));
        if (m == "direct") c.mode = InversionMode::Direct;
        else if (m == "pipeline") c.mode = InversionMode::Pipeline;
        else throw ConfigError("mode must be direct or pipeline");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    c.validate();
    return c;
}

RunConfig load_config(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str());
}

std::string crc32_hex(const std::string& data)
{
    boost::crc_32_type crc;
    crc.process_bytes(data.data(), data.size());
    return fmt::format("{:08x}", crc.checksum());
}

OutputDir::OutputDir(fs::path dir, std::string mode, const RunConfig& cfg)
    : dir_(std::move(dir)), mode_(std::move(mode)), config_hash_(crc32_hex(cfg.canonical_json()))
{
    fs::create_directories(dir_);
}

void OutputDir::write(const std::string& name, const std::string& content)
{
    std::ofstream f(dir_ / name, std::ios::binary);
    f << content;
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    entries_.push_back({name, content.size(), crc32_hex(content)});
}

std::string OutputDir::finish()
{
    json files = json::array();
    for (const ManifestEntry& e : entries_) files.push_back({{"name", e.name}, {"bytes", e.bytes}, {"crc32", e.crc32}});
    const json m{{"schema", "sww.manifest/1"}, {"mode", mode_}, {"config_hash", config_hash_}, {"files", files}};
    const std::string text = m.dump(2) + "\n";
    std::ofstream f(dir_ / "manifest.json", std::ios::binary);
    f << text;
    return text;
}

std::string spectrum_json(const NashMoserResult& r)
{
    auto coeffs = [](const Field2D& f) {
        json a = json::array();
        for (int l = -f.L(); l <= f.L(); ++l)
            for (int j = -f.J(); j <= f.J(); ++j) {
                const cd c = f(l, j);
                if (c != cd(0.0)) a.push_back({l, j, c.real(), c.imag()});
            }
        return a;
    };
    const RunRecord& rec = r.record;
    const json j{{"schema", "sww.spectrum/1"},
                 {"kappa", rec.kappa},
                 {"eps", rec.eps},
                 {"xi", rec.xi},
                 {"omega", rec.omega},
                 {"L", r.u.eta.L()},
                 {"J", r.u.eta.J()},
                 {"eta", coeffs(r.u.eta)},
                 {"psi", coeffs(r.u.psi)}};
    return j.dump(1) + "\n";
}

std::string eta_grid_csv(const Field2D& eta, int n)
{
    std::string s = "# sww.eta_grid/1\nt,x,eta\n";
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const double t = 2.0 * kPi * a / n, x = 2.0 * kPi * b / n;
            s += fmt::format("{:.17g},{:.17g},{:.17g}\n", t, x, evaluate(eta, t, x).real());
        }
    return s;
}

std::string run_record_json(const RunRecord& r)
{
    json steps = json::array();
    for (const StepRecord& s : r.steps)
        steps.push_back({{"n", s.n},
                         {"N", s.N},
                         {"residual", s.residual},
                         {"step_norm", s.step_norm},
                         {"pivot", s.pivot},
                         {"melnikov_margin", s.melnikov_margin},
                         {"eigen_shift", s.eigen_shift}});
    json j{{"schema", "sww.run/1"},
           {"kappa", r.kappa},
           {"eps", r.eps},
           {"xi", r.xi},
           {"omega", r.omega},
           {"initial_residual", r.initial_residual},
           {"final_residual", r.final_residual()},
           {"log_ratios", r.log_ratios()},
           {"steps", steps},
           {"converged", r.converged},
           {"excluded", r.excluded},
           {"parity_defect", r.parity_defect},
           {"message", r.message}};
    if (r.violation) j["violation"] = {{"l", r.violation->l}, {"j", r.violation->j}, {"ratio", r.violation->ratio}};
    return j.dump(2) + "\n";
}

int cmd_solve(const RunConfig& cfg)
{
    cfg.validate();
    OutputDir out(cfg.out, "solve", cfg);
    NashMoserConfig nm = NashMoserConfig::from_sigma(cfg.sigma);
    nm.table = std::min(cfg.L_max, cfg.J_max);
    nm.N_max = nm.table;
    nm.tol = cfg.tol;
    nm.mode = cfg.mode;
    const double eps = cfg.eps.front();

    double xi = cfg.xi.front();
    if (eps > 0.0) {
        const auto found = find_admissible_xi(cfg.kappa, eps, cfg.xi, nm);
        if (!found) {
            RunRecord rec;
            rec.kappa = cfg.kappa;
            rec.eps = eps;
            rec.excluded = true;
            rec.message = "no admissible xi on the grid";
            out.write("run_record.json", run_record_json(rec));
            out.finish();
            fmt::print(stderr, "solve: {}\n", rec.message);
            return 3;
        }
        xi = *found;
    }
    fmt::print("solve: kappa = {:.10g}, eps = {:g}, xi = {:g}, mode = {}\n", cfg.kappa, eps, xi, mode_name(cfg.mode));
    const NashMoserResult r = nash_moser_run(cfg.kappa, eps, xi, nm);
    for (const StepRecord& s : r.record.steps)
        fmt::print("  step {} N = {:2d} residual = {:.3e} ({:.1f} s)\n", s.n, s.N, s.residual, s.seconds);
    out.write("run_record.json", run_record_json(r.record));
    if (!r.record.converged) {
        out.finish();
        fmt::print(stderr, "solve: {}\n", r.record.message);
        return r.record.excluded ? 3 : 1;
    }
    out.write("spectrum.json", spectrum_json(r));
    out.write("eta_grid.csv", eta_grid_csv(r.u.eta, cfg.grid));
    out.finish();
    fmt::print("solve: {} final residual {:.3e}\n", r.record.message, r.record.final_residual());
    return 0;
}

int cmd_verify(const RunConfig& cfg, const std::string& suite)
{
    cfg.validate();
    const auto& names = suite_names();
    if (std::find(names.begin(), names.end(), suite) == names.end()) throw ConfigError("unknown suite '" + suite + "'");
    VerifyOptions o;
    o.kappa = cfg.kappa;
    o.seed = cfg.seed;
    o.threads = cfg.threads;
    o.samples = cfg.samples;
    o.measure_J_max = cfg.measure_J_max;
    const std::vector<ProbeResult> res = run_suite(suite, o);
    bool ok = true;
    for (const ProbeResult& r : res) {
        ok = ok && r.pass();
        fmt::print("{} {:2d} {} ({:.1f} s)\n", r.pass() ? "PASS" : "FAIL", r.id, r.title, r.seconds);
        for (const Check& c : r.checks) fmt::print("       {:<36} {:.6g}\n", c.name, c.measured);
    }
    OutputDir out(cfg.out, "verify", cfg);
    out.write("verify.csv", checks_csv(res));
    out.finish();
    return ok ? 0 : 1;
}

int cmd_measure(const RunConfig& cfg)
{
    cfg.validate();
    if (cfg.samples < 1000) throw ConfigError("measure needs at least 1000 samples");
    MeasureConfig mc;
    mc.samples = cfg.samples;
    mc.J_max = cfg.measure_J_max;
    mc.seed = cfg.seed;
    mc.threads = cfg.threads;
    const MeasureReport r = measure_estimate(cfg.kappa, cfg.eps, mc);

    std::string csv = "# sww.measure/1\neps,gamma,samples,excluded,fraction,min_violating_j,cutoff_j,perturbation\n";
    json pts = json::array();
    for (const MeasurePoint& p : r.points) {
        csv += fmt::format("{:.17g},{:.17g},{},{},{:.17g},{},{:.17g},{:.17g}\n", p.eps, p.gamma, p.samples, p.excluded,
                           p.fraction, p.min_violating_j, p.cutoff_j, p.perturbation);
        pts.push_back({{"eps", p.eps}, {"excluded", p.excluded}, {"fraction", p.fraction}});
        fmt::print("measure: eps = {:g} excluded {}/{} smallest violating j = {}\n", p.eps, p.excluded, p.samples,
                   p.min_violating_j);
    }
    const auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    const json j{{"schema", "sww.measure/1"},
                 {"kappa", cfg.kappa},
                 {"gamma_star", r.gamma_star},
                 {"fit_C", r.fit_C},
                 {"fitted_exponent", num(r.fitted_exponent)},
                 {"C0", num(r.C0)},
                 {"monotone", r.monotone},
                 {"cutoff_respected", r.cutoff_respected},
                 {"points", pts}};
    OutputDir out(cfg.out, "measure", cfg);
    out.write("measure.csv", csv);
    out.write("measure.json", j.dump(2) + "\n");
    out.finish();
    return 0;
}

}  // namespace sww

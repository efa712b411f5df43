// rmk: rules, kernel errors and pricing experiments from the command line.
//
// Exit codes: 0 ok, 2 bad input, 3 convergence/accuracy failure, 4 I/O failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "roughmarkov/errors.hpp"
#include "roughmarkov/kernel.hpp"
#include "roughmarkov/optimizers.hpp"
#include "roughmarkov/pricing.hpp"
#include "roughmarkov/quadrature.hpp"
#include "roughmarkov/riccati.hpp"

using namespace roughmarkov;
using json = nlohmann::json;

namespace {

constexpr const char* kThreadsEnv = "RMK_THREADS";

int default_threads() {
    if (const char* s = std::getenv(kThreadsEnv)) {
        int n = std::atoi(s);
        if (n >= 1) return n;
    }
    return 1;
}

double round12(double v) {
    if (!std::isfinite(v)) return v;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::strtod(buf, nullptr);
}

// Rows go out as they are produced in CSV mode so partial results survive a
// later failure; JSON is assembled and written by finish().
class Table {
  public:
    Table(std::vector<std::string> columns, std::string format, const std::string& path)
        : cols_(std::move(columns)), json_(format == "json") {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw IoError("cannot open " + path);
            out_ = file_.get();
        }
        if (!json_) {
            for (std::size_t i = 0; i < cols_.size(); ++i) *out_ << (i ? "," : "") << cols_[i];
            *out_ << '\n';
            check();
        }
    }

    using Cell = std::variant<double, std::string>;

    void row(const std::vector<Cell>& cells) {
        if (json_) {
            json r;
            for (std::size_t i = 0; i < cols_.size(); ++i)
                std::visit([&](const auto& v) { r[cols_[i]] = cell_json(v); }, cells[i]);
            rows_.push_back(std::move(r));
            return;
        }
        for (std::size_t i = 0; i < cells.size(); ++i) {
            *out_ << (i ? "," : "");
            std::visit([&](const auto& v) { write_cell(v); }, cells[i]);
        }
        *out_ << '\n';
        out_->flush();
        check();
    }

    // Extra scalars (fitted slopes, error summaries). CSV sends them to stderr.
    void summary(const std::string& key, double v) {
        if (json_)
            summary_[key] = round12(v);
        else
            std::fprintf(stderr, "%s=%.12g\n", key.c_str(), v);
    }

    void finish() {
        if (done_) return;
        done_ = true;
        if (!json_) return;
        json doc = {{"columns", cols_}, {"rows", rows_}};
        if (!summary_.empty()) doc["summary"] = summary_;
        *out_ << doc.dump(2) << '\n';
        out_->flush();
        check();
    }

  private:
    static json cell_json(double v) { return round12(v); }
    static json cell_json(const std::string& s) { return s; }
    void write_cell(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.12g", v);
        *out_ << buf;
    }
    void write_cell(const std::string& s) { *out_ << s; }
    void check() {
        if (!*out_) throw IoError("write failed");
    }

    std::vector<std::string> cols_;
    bool json_;
    std::unique_ptr<std::ofstream> file_;
    std::ostream* out_ = &std::cout;
    json rows_ = json::array();
    json summary_ = json::object();
    bool done_ = false;
};

std::unique_ptr<Table> g_table;  // flushed on the error path too

Table& open_table(std::vector<std::string> cols, const std::string& format, const std::string& path) {
    g_table = std::make_unique<Table>(std::move(cols), format, path);
    return *g_table;
}

// Runs f(0..n-1) on up to `threads` workers. Results are placed by index, so
// output order never depends on scheduling.
void parallel_for(int n, int threads, const std::function<void(int)>& f) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex m;
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min(threads, n); ++t)
        pool.emplace_back([&] {
            for (int i; (i = next++) < n;) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(m);
                    if (!err) err = std::current_exception();
                    next = n;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Flags shared by everything that builds a rule.
struct RuleOpts {
    std::string method;
    double H = 0.1;
    double T = 1.0;
    int N = 0;
    double L = 0.0;  // ol2 node bound
    double q = 1.1;  // bl2 growth factor
    double eps = 0.0;
    std::optional<double> c, beta, a, alpha, b;  // gg / ngg overrides
    int max_evals = 20000;
    int restarts = 3;
    std::uint64_t seed = 20240607;
    bool verbose = false;

    void add(CLI::App* app, bool need_method) {
        auto* m = app->add_option("--method", method, "gg, ngg, ae, ol1, ol2 or bl2")
                      ->check(CLI::IsMember({"gg", "ngg", "ae", "ol1", "ol2", "bl2"}));
        if (need_method) m->required();
        app->add_option("--H", H, "Hurst parameter");
        app->add_option("--N", N, "node budget");
        app->add_option("--L", L, "node bound for ol2");
        app->add_option("--q", q, "bl2 bound growth factor");
        app->add_option("--eps", eps, "bl2 stopping slack");
        app->add_option("--c", c, "ngg geometric ratio");
        app->add_option("--beta", beta, "gg/ngg panel exponent");
        app->add_option("--a", a, "gg/ngg first panel scale");
        app->add_option("--alpha", alpha, "gg panel growth");
        app->add_option("--b", b, "gg level scale");
        app->add_option("--max-evals", max_evals, "optimizer evaluation budget");
        app->add_option("--restarts", restarts, "optimizer restarts");
        app->add_option("--seed", seed, "optimizer seed");
        app->add_flag("--verbose", verbose, "optimizer telemetry on stderr");
    }

    QuadratureRule build(double horizon, int n) const {
        if (n < 1) throw DomainError("--N must be at least 1");
        OptBudget bud{max_evals, restarts, seed, verbose};
        if (method == "gg") {
            auto p = GGParams::defaults(horizon);
            if (alpha) p.alpha = *alpha;
            if (beta) p.beta = *beta;
            if (a) p.a = *a;
            if (b) p.b = *b;
            return geometric_rule(H, horizon, n, p);
        }
        if (method == "ngg") {
            auto p = NGGParams::defaults(horizon);
            if (c) p.c = *c;
            if (beta) p.beta = *beta;
            if (a) p.a = *a;
            return non_geometric_rule(H, horizon, n, p);
        }
        if (method == "ae") return ae_rule(H, horizon, n);
        if (method == "ol1") return opt_l1(H, horizon, n, bud).rule;
        if (method == "ol2") {
            if (!(L > 0.0)) throw DomainError("ol2 needs --L > 0");
            return opt_l2(H, horizon, n, L, bud).rule;
        }
        if (method == "bl2") return bl2(H, horizon, n, q, eps, bud);
        throw DomainError("unknown method " + method);
    }
};

struct OutOpts {
    std::string output;
    std::string format = "csv";
    int threads = default_threads();

    void add(CLI::App* app) {
        app->add_option("-o,--output", output, "output file (default stdout)");
        app->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        app->add_option("--threads", threads, std::string("worker threads (default $") + kThreadsEnv + " or 1)")
            ->check(CLI::PositiveNumber);
    }
};

// Model parameters: a named preset with optional overrides.
struct ModelOpts {
    std::string preset = "sec52";
    std::optional<double> V0, theta, lam, nu, rho;
    std::string rule_file;
    bool compare = false;
    int n_steps = 64;
    double tol = 1e-4;

    void add(CLI::App* app) {
        app->add_option("--preset", preset, "sec52 or sec54")->check(CLI::IsMember({"sec52", "sec54"}));
        app->add_option("--V0", V0);
        app->add_option("--theta", theta);
        app->add_option("--lambda", lam);
        app->add_option("--nu", nu);
        app->add_option("--rho", rho);
        app->add_option("--rule", rule_file, "rule JSON file");
        app->add_flag("--compare", compare, "also price the exact model and report the max relative error");
        app->add_option("--steps", n_steps, "Riccati steps at the first level");
        app->add_option("--tol", tol, "relative accuracy target");
    }

    HestonParams params() const {
        HestonParams p = roughmarkov::preset(preset);
        if (V0) p.V0 = *V0;
        if (theta) p.theta = *theta;
        if (lam) p.lam = *lam;
        if (nu) p.nu = *nu;
        if (rho) p.rho = *rho;
        p.validate();
        return p;
    }
};

// The Markovian model from --rule or --method; empty when neither is given.
std::optional<QuadratureRule> markov_rule(const ModelOpts& mo, RuleOpts& ro, double horizon) {
    if (!mo.rule_file.empty()) {
        KernelSpec spec(0.5, 1.0);
        auto r = read_rule_file(mo.rule_file, &spec);
        ro.H = spec.H;
        return r;
    }
    if (!ro.method.empty()) return ro.build(horizon, ro.N);
    return std::nullopt;
}

std::vector<double> grid(double lo, double hi, int n) {
    if (n < 1) throw DomainError("grid needs at least one point");
    if (n == 1) return {lo};
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
    return v;
}

// ---- rule -------------------------------------------------------------------

int cmd_rule(RuleOpts& ro, const std::string& path) {
    auto rule = ro.build(ro.T, ro.N);
    KernelSpec spec(ro.H, ro.T);
    if (path.empty() || path == "-")
        std::cout << rule_to_json(spec, rule) << '\n';
    else
        write_rule_file(path, spec, rule);
    std::fprintf(path.empty() || path == "-" ? stderr : stdout, "nodes=%zu max_node=%.12g log10_max_node=%.6f\n",
                 rule.size(), rule.max_node(), rule.max_node() > 0 ? std::log10(rule.max_node()) : -INFINITY);
    return 0;
}

// ---- kernel-error -----------------------------------------------------------

double kernel_error(const KernelSpec& spec, const QuadratureRule& r, const std::string& norm, double tol,
                    double* relative) {
    double abs = 0.0, ref = 0.0;
    if (norm == "l1") {
        auto e = l1_error_intersections(spec, r, tol);
        abs = e.absolute_l1;
        ref = spec.norm_l1();
    } else if (norm == "l1exact") {
        abs = l1_error_lower_biased(spec, r);
        ref = spec.norm_l1();
    } else {
        abs = l2_error(spec, r);
        ref = norm_l2(spec);
    }
    *relative = ref > 0 ? abs / ref : 0.0;
    return abs;
}

int cmd_kernel_error(RuleOpts& ro, const ModelOpts& mo, const std::string& norm, double tol,
                     const std::vector<int>& Ns, const OutOpts& oo) {
    auto& t = open_table({"method", "H", "T", "N", "count", "absolute", "relative"}, oo.format, oo.output);
    if (!mo.rule_file.empty()) {
        KernelSpec spec(0.5, 1.0);
        auto r = read_rule_file(mo.rule_file, &spec);
        double rel, abs = kernel_error(spec, r, norm, tol, &rel);
        t.row({std::string("file"), spec.H, spec.T, double(r.size()), double(r.size()), abs, rel});
        t.finish();
        return 0;
    }
    if (ro.method.empty()) throw DomainError("kernel-error needs --rule or --method");
    std::vector<int> list = Ns.empty() ? std::vector<int>{ro.N} : Ns;
    KernelSpec spec(ro.H, ro.T);
    std::vector<std::array<double, 3>> res(list.size());
    parallel_for(int(list.size()), oo.threads, [&](int i) {
        auto r = ro.build(ro.T, list[i]);
        double rel, abs = kernel_error(spec, r, norm, tol, &rel);
        res[i] = {double(r.size()), abs, rel};
    });
    for (std::size_t i = 0; i < list.size(); ++i)
        t.row({ro.method, ro.H, ro.T, double(list[i]), res[i][0], res[i][1], res[i][2]});
    t.finish();
    return 0;
}

// ---- pricing ----------------------------------------------------------------

FourierSettings settings(const OutOpts& oo, bool verbose) {
    FourierSettings s;
    s.threads = oo.threads;
    s.verbose = verbose;
    return s;
}

// One smile per maturity so each maturity's rows are out before the next starts.
int cmd_surface(RuleOpts& ro, const ModelOpts& mo, const std::vector<double>& Ts, double kmin, double kmax,
                int kcount, bool scale, bool verbose, const OutOpts& oo) {
    if (Ts.empty()) throw DomainError("no maturities given");
    auto p = mo.params();
    double Tmin = *std::min_element(Ts.begin(), Ts.end()), Tmax = *std::max_element(Ts.begin(), Ts.end());
    double horizon = Ts.size() == 1 ? Tmax : rule_horizon(Tmin, Tmax, ro.N);
    auto rule = markov_rule(mo, ro, horizon);
    auto& t = open_table({"model", "maturity", "log_moneyness", "price", "ivol"}, oo.format, oo.output);
    auto set = settings(oo, verbose);
    double worst = 0.0;
    for (double T : Ts) {
        auto ks = grid(kmin, kmax, kcount);
        if (scale)
            for (double& k : ks) k *= std::sqrt(T);
        std::optional<SmileResult> ex, mk;
        if (!rule || mo.compare) ex = smile({KernelSpec(ro.H, T), p, T, mo.n_steps}, {T}, {ks}, mo.tol, set);
        if (rule) mk = smile({*rule, p, T, mo.n_steps}, {T}, {ks}, mo.tol, set);
        for (auto* s : {&ex, &mk}) {
            if (!*s) continue;
            const char* name = s == &ex ? "exact" : "markov";
            for (std::size_t i = 0; i < ks.size(); ++i)
                t.row({std::string(name), T, ks[i], (*s)->prices[0][i], (*s)->ivols[0][i]});
        }
        if (ex && mk) worst = std::max(worst, max_relative_error(mk->ivols, ex->ivols));
    }
    if (rule && mo.compare) t.summary("max_relative_error", worst);
    if (rule) t.summary("rule_horizon", horizon);
    t.finish();
    return 0;
}

int cmd_skew(RuleOpts& ro, const ModelOpts& mo, std::vector<double> Ts, double tmin, double tmax, int tcount,
             bool verbose, const OutOpts& oo) {
    if (Ts.empty()) {
        if (!(tmin > 0 && tmax >= tmin) || tcount < 1) throw DomainError("bad maturity range");
        for (int i = 0; i < tcount; ++i)
            Ts.push_back(tcount == 1 ? tmin : tmin * std::pow(tmax / tmin, double(i) / (tcount - 1)));
    }
    auto p = mo.params();
    double Tmin = *std::min_element(Ts.begin(), Ts.end()), Tmax = *std::max_element(Ts.begin(), Ts.end());
    auto rule = markov_rule(mo, ro, Ts.size() == 1 ? Tmax : rule_horizon(Tmin, Tmax, std::max(ro.N, 1)));
    auto& t = open_table({"model", "maturity", "skew"}, oo.format, oo.output);
    auto set = settings(oo, verbose);
    for (int which = 0; which < 2; ++which) {
        if (which == 0 && rule && !mo.compare) continue;
        if (which == 1 && !rule) continue;
        KernelModel m = which == 0 ? KernelModel(KernelSpec(ro.H, Tmax)) : KernelModel(*rule);
        const char* name = which == 0 ? "exact" : "markov";
        std::vector<double> x, y;
        // maturity by maturity so partial output survives a failure
        for (double T : Ts) {
            auto s = skew({m, p, Tmax, mo.n_steps}, {T}, mo.tol, set);
            t.row({std::string(name), s[0].first, s[0].second});
            if (s[0].second < 0) {
                x.push_back(std::log(T));
                y.push_back(std::log(-s[0].second));
            }
        }
        if (x.size() >= 2) t.summary(std::string(name) + "_loglog_slope", fit_slope(x, y));
    }
    t.finish();
    return 0;
}

int cmd_digital(RuleOpts& ro, const ModelOpts& mo, double T, double kmin, double kmax, int kcount, double R,
                bool verbose, const OutOpts& oo) {
    auto p = mo.params();
    auto rule = markov_rule(mo, ro, T);
    auto ks = grid(kmin, kmax, kcount);
    auto& t = open_table({"model", "maturity", "log_moneyness", "price"}, oo.format, oo.output);
    auto set = settings(oo, verbose);
    set.threads = 1;  // parallel over strikes instead
    double worst = 0.0;
    std::vector<double> pe(ks.size()), pm(ks.size());
    auto price = [&](const KernelModel& m, double k) {
        return fourier_price({m, p, T, mo.n_steps}, {Payoff::Digital, p.S0 * std::exp(k)}, R, mo.tol, set).price;
    };
    bool do_exact = !rule || mo.compare;
    parallel_for(int(ks.size()), oo.threads, [&](int i) {
        if (do_exact) pe[i] = price(KernelSpec(ro.H, T), ks[i]);
        if (rule) pm[i] = price(*rule, ks[i]);
    });
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (do_exact) t.row({std::string("exact"), T, ks[i], pe[i]});
        if (rule) t.row({std::string("markov"), T, ks[i], pm[i]});
        if (do_exact && rule && pe[i] != 0.0) worst = std::max(worst, std::abs(pm[i] / pe[i] - 1.0));
    }
    if (do_exact && rule) t.summary("max_relative_error", worst);
    t.finish();
    return 0;
}

// ---- convergence ------------------------------------------------------------

int cmd_convergence(RuleOpts& ro, const ModelOpts& mo, const std::string& study, std::vector<int> Ns, double kmin,
                    double kmax, int kcount, const OutOpts& oo) {
    if (study == "ngg-rate")
        ro.method = "ngg";
    else if (ro.method.empty())
        ro.method = "gg";
    bool weak = study == "weak-vs-kernel";
    if (Ns.empty()) {
        if (weak)
            Ns = {4, 9, 16, 25, 36};
        else
            for (int N = 16; N <= 256; N += 16) Ns.push_back(N);
    }
    KernelSpec spec(ro.H, ro.T);
    std::vector<std::string> cols = {"N", "count", "kernel_error"};
    if (weak) cols.push_back("smile_error");
    auto& t = open_table(cols, oo.format, oo.output);

    std::optional<SmileResult> exact;
    std::vector<double> ks;
    HestonParams p;
    if (weak) {
        p = mo.params();
        ks = grid(kmin, kmax, kcount);
        exact = smile({spec, p, ro.T, mo.n_steps}, {ro.T}, {ks}, mo.tol, settings(oo, false));
    }
    std::vector<std::array<double, 3>> res(Ns.size());
    parallel_for(int(Ns.size()), oo.threads, [&](int i) {
        auto r = ro.build(ro.T, Ns[i]);
        double k = weak ? l1_error_intersections(spec, r, 1e-8).relative_l1
                        : l1_error_lower_biased(spec, r) / spec.norm_l1();
        double s = NAN;
        if (weak) s = max_relative_error(smile({r, p, ro.T, mo.n_steps}, {ro.T}, {ks}, mo.tol).ivols, exact->ivols);
        res[i] = {double(r.size()), k, s};
    });
    std::vector<double> x, yk, ys;
    for (std::size_t i = 0; i < Ns.size(); ++i) {
        std::vector<Table::Cell> row = {double(Ns[i]), res[i][0], res[i][1]};
        if (weak) row.push_back(res[i][2]);
        t.row(row);
        x.push_back(std::sqrt((ro.H + 0.5) * res[i][0]));
        yk.push_back(std::log(res[i][1]));
        ys.push_back(std::log(res[i][2]));
    }
    if (x.size() >= 2) {
        t.summary("kernel_slope", fit_slope(x, yk));
        if (weak) t.summary("smile_slope", fit_slope(x, ys));
    }
    t.finish();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Markovian approximations of the rough Heston model"};
    app.require_subcommand(1);

    RuleOpts ro;
    ModelOpts mo;
    OutOpts oo;

    auto* rule = app.add_subcommand("rule", "build a quadrature rule and write it as JSON");
    ro.add(rule, true);
    rule->add_option("--T", ro.T, "horizon");
    std::string rule_out;
    rule->add_option("-o,--output", rule_out, "rule JSON file (default stdout)");

    auto* kerr = app.add_subcommand("kernel-error", "L1 or L2 kernel errors");
    ro.add(kerr, false);
    kerr->add_option("--T", ro.T, "horizon");
    kerr->add_option("--rule", mo.rule_file, "rule JSON file");
    std::string norm = "l1";
    double ktol = 1e-8;
    std::vector<int> Ns;
    kerr->add_option("--norm", norm, "l1, l1exact or l2")->check(CLI::IsMember({"l1", "l1exact", "l2"}));
    kerr->add_option("--tol", ktol, "intersections tolerance");
    kerr->add_option("--Ns", Ns, "sweep over several N");
    oo.add(kerr);

    std::vector<double> Ts;
    double kmin = -1.5, kmax = 0.75;
    int kcount = 301;
    bool scale = false, verbose = false;
    auto add_pricing = [&](CLI::App* sc) {
        ro.add(sc, false);
        mo.add(sc);
        oo.add(sc);
        sc->add_flag("--trace", verbose, "per-level Fourier telemetry on stderr");
    };
    auto add_strikes = [&](CLI::App* sc) {
        sc->add_option("--k-min", kmin, "smallest log-moneyness");
        sc->add_option("--k-max", kmax, "largest log-moneyness");
        sc->add_option("--k-count", kcount, "number of strikes");
    };

    auto* sm = app.add_subcommand("smile", "implied volatility smile at one maturity");
    add_pricing(sm);
    add_strikes(sm);
    double T1 = 1.0;
    sm->add_option("--T", T1, "maturity");
    sm->add_flag("--sqrt-T", scale, "multiply log-moneyness by sqrt(T)");

    auto* sf = app.add_subcommand("surface", "smiles at several maturities from one rule");
    add_pricing(sf);
    add_strikes(sf);
    sf->add_option("--T", Ts, "maturities")->required();
    sf->add_flag("--sqrt-T", scale, "multiply log-moneyness by sqrt(T)");

    auto* sk = app.add_subcommand("skew", "at-the-money skew term structure");
    add_pricing(sk);
    double tmin = 0.004, tmax = 1.0;
    int tcount = 25;
    sk->add_option("--T", Ts, "maturities (overrides the range)");
    sk->add_option("--T-min", tmin);
    sk->add_option("--T-max", tmax);
    sk->add_option("--T-count", tcount, "geometric grid size");

    auto* dg = app.add_subcommand("digital", "digital call prices");
    add_pricing(dg);
    add_strikes(dg);
    dg->get_option("--k-count")->default_val(21);
    double R = 0.5;
    dg->add_option("--T", T1, "maturity");
    dg->add_option("--damping", R, "contour Re z");

    auto* cv = app.add_subcommand("convergence", "error-rate studies");
    ro.add(cv, false);
    mo.add(cv);
    oo.add(cv);
    std::string study;
    cv->add_option("--study", study)->required()->check(CLI::IsMember({"gg-rate", "ngg-rate", "weak-vs-kernel"}));
    cv->add_option("--T", ro.T, "horizon / maturity");
    cv->add_option("--Ns", Ns, "node budgets");
    add_strikes(cv);
    cv->get_option("--k-count")->default_val(41);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*rule) return cmd_rule(ro, rule_out);
        if (*kerr) return cmd_kernel_error(ro, mo, norm, ktol, Ns, oo);
        if (*sm) return cmd_surface(ro, mo, {T1}, kmin, kmax, kcount, scale, verbose, oo);
        if (*sf) return cmd_surface(ro, mo, Ts, kmin, kmax, kcount, scale, verbose, oo);
        if (*sk) return cmd_skew(ro, mo, Ts, tmin, tmax, tcount, verbose, oo);
        if (*dg) return cmd_digital(ro, mo, T1, kmin, kmax, kcount, R, verbose, oo);
        if (*cv) return cmd_convergence(ro, mo, study, Ns, kmin, kmax, kcount, oo);
    } catch (const DomainError& e) {
        std::cerr << "rmk: " << e.what() << '\n';
        return 2;
    } catch (const ConvergenceError& e) {
        if (g_table) try { g_table->finish(); } catch (...) {}
        std::cerr << "rmk: " << e.what() << '\n';
        return 3;
    } catch (const IoError& e) {
        std::cerr << "rmk: " << e.what() << '\n';
        return 4;
    }
    return 0;
}

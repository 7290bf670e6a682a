// ddrisk: command-line front end.
//
// Exit codes: 0 ok, 1 invalid input, 2 domain or budget error, 3 a check or
// verification suite failed.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ddrisk/ddrisk.hpp"

namespace {

enum Exit { kOk = 0, kValidation = 1, kDomain = 2, kVerifyFailed = 3 };

struct Options {
    std::string input;
    std::string probs;
    std::string measure = "down";
    int draws = 5;
    std::string grid;
    std::string phi;
    int k_max = 8;
    std::uint64_t seed = 42;
    std::uint64_t budget = ddrisk::kDefaultBudget;
    std::string out;
    unsigned threads = 1;
    std::size_t samples = 200;
};

ddrisk::io::LoadedInput load(const Options& o) {
    std::vector<double> probs;
    if (!o.probs.empty()) probs = ddrisk::io::parse_list(o.probs);
    return ddrisk::io::load_input(o.input, probs);
}

/// Writes to --out when given, stdout otherwise.
class Output {
public:
    explicit Output(const std::string& path) {
        if (path.empty()) return;
        file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
        if (!*file_) throw ddrisk::ValidationError("cannot write '" + path + "'");
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

int cmd_check(const Options& o) {
    const auto in = load(o);
    const auto report = ddrisk::run_check(in.matrix, in.market);
    ddrisk::print_check(std::cout, report);
    return report.passed() ? kOk : kVerifyFailed;
}

int cmd_surface(const Options& o) {
    const auto in = load(o);
    ddrisk::GridSpec spec;
    spec.measure = ddrisk::parse_measure(o.measure);
    spec.draws = o.draws;
    if (o.grid.empty())
        spec.axes.assign(in.matrix.systems(), ddrisk::kDefaultAxis);
    else
        spec.axes = ddrisk::parse_grid(o.grid);
    const auto result = ddrisk::evaluate_surface(in.matrix, spec, o.budget, o.threads);
    if (result.partial) {
        std::cerr << "error: " << result.message << " (partial output)\n";
        Output out(o.out);
        ddrisk::write_surface_csv(out.stream(), result, spec.axes.size());
        return kDomain;
    }
    Output out(o.out);
    ddrisk::write_surface_csv(out.stream(), result, spec.axes.size());
    return kOk;
}

int cmd_converge(const Options& o) {
    const auto in = load(o);
    const ddrisk::PortionVector phi(ddrisk::io::parse_list(o.phi));
    ddrisk::require_dimension(in.matrix, phi.values());
    const auto series = ddrisk::converge_series(in.matrix, phi, o.k_max, o.budget);
    Output out(o.out);
    ddrisk::write_series_csv(out.stream(), series);
    return kOk;
}

int cmd_eval(const Options& o) {
    const auto in = load(o);
    const ddrisk::TradingGame game(in.matrix, o.draws, o.budget);
    const ddrisk::PortionVector phi(ddrisk::io::parse_list(o.phi));
    const auto kind = ddrisk::parse_measure(o.measure);
    const auto e = ddrisk::evaluate(game, kind, phi);
    std::cout << ddrisk::to_string(kind) << ' ' << ddrisk::io::format_double(e.value) << '\n';
    std::cout << "assumption: " << (e.assumption_verified ? "verified" : "NOT verified") << '\n';
    if (e.small_s_verified)
        std::cout << "small-s regime: " << (*e.small_s_verified ? "verified" : "NOT verified") << '\n';
    return kOk;
}

int cmd_verify(const Options& o) {
    const auto in = load(o);
    const auto report = ddrisk::run_verify(in.matrix, o.draws, o.samples, o.seed, o.budget);
    ddrisk::print_verify(std::cout, report);
    return report.passed() ? kOk : kVerifyFailed;
}

int cmd_from_market(const Options& o) {
    const auto m = ddrisk::io::market_from_json(ddrisk::io::parse_json(ddrisk::io::read_file(o.input), o.input));
    Output out(o.out);
    out.stream() << ddrisk::io::to_json(ddrisk::build_trade_matrix(m)).dump(2) << '\n';
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Drawdown risk measures of a fractional trading game"};
    app.require_subcommand(1);
    Options o;

    auto input = [&](CLI::App* sub) {
        sub->add_option("input", o.input, "trade matrix (JSON or CSV) or market (JSON)")->required();
        sub->add_option("--probs", o.probs, "row probabilities for CSV input, comma-separated");
        sub->add_option("--budget", o.budget, "maximum number of enumerated paths or count vectors");
    };

    auto* check = app.add_subcommand("check", "rank, no-risk-free-investment and arbitrage checks");
    input(check);

    auto* surface = app.add_subcommand("surface", "evaluate a measure on a grid of portion vectors");
    input(surface);
    surface->add_option("--measure", o.measure, "down|downX|downFirstApprox|cur|curX|curFirstApprox|upExpect|runupExpect");
    surface->add_option("--K", o.draws, "number of draws");
    surface->add_option("--grid", o.grid, "min:max:steps per axis, comma-separated");
    surface->add_option("--out", o.out, "output CSV (default stdout)");
    surface->add_option("--threads", o.threads, "worker threads");

    auto* converge = app.add_subcommand("converge", "rho_cur for K = 1..Kmax at a fixed portion vector");
    input(converge);
    converge->add_option("--phi", o.phi, "portion vector, comma-separated")->required();
    converge->add_option("--Kmax", o.k_max, "largest K");
    converge->add_option("--out", o.out, "output CSV (default stdout)");

    auto* eval = app.add_subcommand("eval", "evaluate one measure at one portion vector");
    input(eval);
    eval->add_option("--measure", o.measure, "measure kind");
    eval->add_option("--K", o.draws, "number of draws");
    eval->add_option("--phi", o.phi, "portion vector, comma-separated")->required();

    auto* verify = app.add_subcommand("verify", "run the seeded property suites");
    input(verify);
    verify->add_option("--K", o.draws, "number of draws");
    verify->add_option("--samples", o.samples, "random points per suite");
    verify->add_option("--seed", o.seed, "RNG seed");

    auto* from_market = app.add_subcommand("from-market", "write the trade matrix JSON of a market JSON");
    from_market->add_option("input", o.input, "market JSON")->required();
    from_market->add_option("--out", o.out, "output JSON (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    try {
        if (*check) return cmd_check(o);
        if (*surface) return cmd_surface(o);
        if (*converge) return cmd_converge(o);
        if (*eval) return cmd_eval(o);
        if (*verify) return cmd_verify(o);
        if (*from_market) return cmd_from_market(o);
    } catch (const ddrisk::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const ddrisk::DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDomain;
    } catch (const ddrisk::BudgetError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    }
    return kOk;
}

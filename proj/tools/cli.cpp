#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "replicator/io.hpp"
#include "replicator/replicator.hpp"
#include "replicator/svg.hpp"

namespace replicator::cli {

namespace {

struct Options {
    std::string base;
    std::string equivocator;
    std::string prefer;
    std::string delta;
    std::string matrix_path;
    std::string config_path;
    std::string out_path;
    std::string save_matrix;
    std::string format = "csv";
    std::string x0;
    std::optional<double> step;
    std::optional<double> t_end;
    std::optional<double> tol;
    std::optional<double> resolution;
    std::uint64_t seed = 1;
    std::int64_t pop = 1000;
    std::optional<std::int64_t> steps;
    std::optional<std::int64_t> every;
};

double parse_number(const std::string& text, const std::string& what)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (text.empty() || used != text.size())
        throw Error(ErrorCode::ParseError, "cannot parse " + what + " '" + text + "'");
    return v;
}

Vector parse_state(const std::string& text)
{
    std::vector<double> xs;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ','))
        xs.push_back(parse_number(tok, "x0 component"));
    Vector x(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i)
        x(static_cast<Eigen::Index>(i)) = xs[i];
    return x;
}

bool model_flags_given(const Options& o)
{
    return !o.base.empty() || !o.equivocator.empty() || !o.prefer.empty() || !o.delta.empty();
}

/// Model spec from flags or config; `r` and `delta` are single values here
/// (sweep passes the first value of each range).
ModelSpec spec_from(const Options& o, std::optional<double> r, std::optional<double> delta)
{
    if (!o.config_path.empty()) {
        if (model_flags_given(o))
            throw Error(ErrorCode::ParseError, "--config cannot be combined with model flags");
        std::ifstream in(o.config_path);
        if (!in)
            throw Error(ErrorCode::ParseError, "cannot open config '" + o.config_path + "'");
        return read_model_config(in);
    }
    ModelSpec spec;
    if (o.base == "bso" || o.base == "BSO")
        spec.base = BaseGame::BSO;
    else if (o.base == "bdo" || o.base == "BDO")
        spec.base = BaseGame::BDO;
    else if (o.base.empty())
        throw Error(ErrorCode::ParseError, "a model source is required: --base, --config or --matrix");
    else
        throw Error(ErrorCode::ParseError, "--base must be bso or bdo");
    spec.equivocator_r = r;
    if (!o.prefer.empty() && !delta)
        throw Error(ErrorCode::ParseError, "--prefer requires --delta");
    if (delta)
        spec.preference = Preference{o.prefer.empty() ? "A" : o.prefer, *delta};
    validate(spec);
    return spec;
}

std::optional<double> single(const std::string& text, const char* what)
{
    if (text.empty())
        return std::nullopt;
    return parse_number(text, what);
}

/// Resolves the game: a matrix file, a config file or the model flags.
struct Game {
    std::optional<ModelSpec> spec;
    PayoffMatrix matrix;
};

Game resolve_game(const Options& o)
{
    if (!o.matrix_path.empty()) {
        if (model_flags_given(o) || !o.config_path.empty())
            throw Error(ErrorCode::ParseError, "--matrix cannot be combined with model flags or --config");
        std::ifstream in(o.matrix_path);
        if (!in)
            throw Error(ErrorCode::ParseError, "cannot open matrix file '" + o.matrix_path + "'");
        return {std::nullopt, read_matrix(in)};
    }
    auto spec = spec_from(o, single(o.equivocator, "--equivocator"), single(o.delta, "--delta"));
    return {spec, build(spec)};
}

class Output {
public:
    Output(const Options& o, std::ostream& fallback) : fallback_(fallback)
    {
        if (!o.out_path.empty()) {
            file_.open(o.out_path, std::ios::binary);
            if (!file_)
                throw Error(ErrorCode::ParseError, "cannot write '" + o.out_path + "'");
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : fallback_; }

private:
    std::ostream& fallback_;
    std::ofstream file_;
};

void require_format(const Options& o, bool svg_allowed)
{
    if (o.format == "csv" || o.format == "json" || (svg_allowed && o.format == "svg"))
        return;
    throw Error(ErrorCode::ParseError, "format '" + o.format + "' is not available for this command");
}

void save_matrix_if_requested(const Options& o, const PayoffMatrix& a)
{
    if (o.save_matrix.empty())
        return;
    std::ofstream f(o.save_matrix);
    if (!f)
        throw Error(ErrorCode::ParseError, "cannot write '" + o.save_matrix + "'");
    write_matrix(f, a);
}

void cmd_tables(const Options& o, std::ostream& out)
{
    require_format(o, false);
    const auto game = resolve_game(o);
    save_matrix_if_requested(o, game.matrix);
    const auto report = game.spec ? table_report(*game.spec) : table_report(game.matrix);
    Output dst(o, out);
    if (o.format == "json")
        dst.stream() << io::to_json(report).dump(2) << '\n';
    else
        io::write_csv(dst.stream(), report);
}

void cmd_simulate(const Options& o, std::ostream& out)
{
    require_format(o, false);
    const auto game = resolve_game(o);
    save_matrix_if_requested(o, game.matrix);
    const auto n = game.matrix.size();
    const SimplexState x0 = o.x0.empty() ? SimplexState::uniform(n) : SimplexState(parse_state(o.x0));
    const double step = o.step.value_or(0.01);
    Trajectory traj = o.tol ? converge(game.matrix, x0, *o.tol, o.t_end.value_or(1e4), {step, 10000})
                            : integrate(game.matrix, x0, step, o.t_end.value_or(100.0));
    Output dst(o, out);
    if (o.format == "json")
        dst.stream() << io::to_json(traj, game.matrix.label_names()).dump(2) << '\n';
    else
        io::write_csv(dst.stream(), traj);
}

void cmd_phase(const Options& o, std::ostream& out)
{
    require_format(o, true);
    const auto game = resolve_game(o);
    save_matrix_if_requested(o, game.matrix);
    const double res = o.resolution.value_or(0.05);
    const auto field = phase_field(game.matrix, res);
    Output dst(o, out);
    if (o.format == "csv") {
        io::write_csv(dst.stream(), field);
        return;
    }
    const auto points = analyze(game.matrix);
    if (o.format == "json")
        dst.stream() << io::to_json(field, points, game.matrix.label_names()).dump(2) << '\n';
    else
        dst.stream() << svg::phase_portrait(game.matrix.label_names(), field, points, res);
}

bool cmd_basins(const Options& o, std::ostream& out)
{
    require_format(o, true);
    const auto game = resolve_game(o);
    save_matrix_if_requested(o, game.matrix);
    BasinOptions bopt;
    if (o.tol)
        bopt.tol = *o.tol;
    if (o.step)
        bopt.step = *o.step;
    const auto map = basins(game.matrix, o.resolution.value_or(0.05), o.t_end.value_or(1e4), bopt);
    Output dst(o, out);
    if (o.format == "json")
        dst.stream() << io::to_json(map, game.matrix.label_names()).dump(2) << '\n';
    else if (o.format == "svg")
        dst.stream() << svg::basin_map(game.matrix.label_names(), map);
    else
        io::write_csv(dst.stream(), map);
    return !map.attractors.empty();
}

void cmd_sweep(const Options& o, std::ostream& out)
{
    require_format(o, true);
    if (!o.matrix_path.empty())
        throw Error(ErrorCode::ParseError, "sweep needs a model (--base or --config), not --matrix");
    const auto r_values = o.equivocator.empty() ? std::vector<double>{} : parse_range(o.equivocator);
    const auto d_values = o.delta.empty() ? std::vector<double>{} : parse_range(o.delta);
    const auto spec = spec_from(o, r_values.empty() ? std::nullopt : std::optional<double>(r_values.front()),
                                d_values.empty() ? std::nullopt : std::optional<double>(d_values.front()));
    save_matrix_if_requested(o, build(spec));
    const auto result = sweep(spec, r_values, d_values);
    Output dst(o, out);
    if (o.format == "json")
        dst.stream() << io::to_json(result).dump(2) << '\n';
    else if (o.format == "svg")
        dst.stream() << svg::sweep_loci(build(spec).label_names(), result);
    else
        io::write_csv(dst.stream(), result);
}

void cmd_abm(const Options& o, std::ostream& out)
{
    require_format(o, false);
    const auto game = resolve_game(o);
    save_matrix_if_requested(o, game.matrix);
    const auto n = game.matrix.size();
    const SimplexState x0 = o.x0.empty() ? SimplexState::uniform(n) : SimplexState(parse_state(o.x0));
    const auto pop0 = Population::from_frequencies(x0, o.pop);
    const auto steps = o.steps.value_or(100 * o.pop);
    const auto snaps = run(game.matrix, pop0, steps, o.seed, o.every.value_or(0));
    Output dst(o, out);
    if (o.format == "json")
        dst.stream() << io::to_json(snaps, game.matrix.label_names(), o.pop, o.seed).dump(2) << '\n';
    else
        io::write_csv(dst.stream(), snaps);
}

void add_common(CLI::App* sub, Options& o)
{
    sub->add_option("--base", o.base, "base game: bso or bdo");
    sub->add_option("--equivocator", o.equivocator, "equivocator distance r in (0,1)");
    sub->add_option("--prefer", o.prefer, "preferred opinion label (default A when --delta is set)");
    sub->add_option("--delta", o.delta, "preference bonus delta in (0,1)");
    sub->add_option("--matrix", o.matrix_path, "payoff matrix file (labels line + n rows)");
    sub->add_option("--config", o.config_path, "model config file (key=value)");
    sub->add_option("--out", o.out_path, "output file (default stdout)");
    sub->add_option("--format", o.format, "csv, json or svg");
    sub->add_option("--save-matrix", o.save_matrix, "also write the payoff matrix to this file");
    sub->add_option("--step", o.step, "RK4 step size");
    sub->add_option("--t-end", o.t_end, "integration horizon");
    sub->add_option("--tol", o.tol, "convergence tolerance on the field max-norm");
    sub->add_option("--resolution", o.resolution, "simplex lattice spacing");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--pop", o.pop, "population size N");
}

} // namespace

std::vector<double> parse_range(const std::string& text)
{
    const auto first = text.find(':');
    if (first == std::string::npos)
        return {parse_number(text, "value")};
    const auto second = text.find(':', first + 1);
    if (second == std::string::npos || text.find(':', second + 1) != std::string::npos)
        throw Error(ErrorCode::ParseError, "range must be start:end:step");
    const double start = parse_number(text.substr(0, first), "range start");
    const double end = parse_number(text.substr(first + 1, second - first - 1), "range end");
    const double step = parse_number(text.substr(second + 1), "range step");
    if (!(step > 0.0) || end < start)
        throw Error(ErrorCode::ParseError, "range needs step > 0 and end >= start");
    std::vector<double> out;
    for (std::int64_t i = 0;; ++i) {
        const double v = start + static_cast<double>(i) * step;
        if (v > end + 1e-9 * step)
            break;
        out.push_back(io::snap(v));
        if (out.size() > 100000)
            throw Error(ErrorCode::ParseError, "range has too many values");
    }
    return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Replicator dynamics for binary-opinion coordination games", "replicator"};
    app.require_subcommand(1);
    Options o;

    auto* tables = app.add_subcommand("tables", "fixed points, spectra and stability of a model");
    auto* simulate = app.add_subcommand("simulate", "integrate a trajectory");
    auto* phase = app.add_subcommand("phase", "sample the replicator field on a simplex lattice");
    auto* basins_cmd = app.add_subcommand("basins", "basins of attraction on a simplex lattice");
    auto* sweep_cmd = app.add_subcommand("sweep", "fixed points over a grid of r and delta");
    auto* abm = app.add_subcommand("abm", "finite-population imitation process");
    for (auto* sub : {tables, simulate, phase, basins_cmd, sweep_cmd, abm})
        add_common(sub, o);
    simulate->add_option("--x0", o.x0, "initial state, comma separated");
    abm->add_option("--x0", o.x0, "initial frequencies, comma separated");
    abm->add_option("--steps", o.steps, "number of imitation steps (default 100 N)");
    abm->add_option("--every", o.every, "snapshot interval in steps (default N)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: BadArguments: " << e.what() << '\n';
        return kBadArguments;
    }

    try {
        if (*tables)
            cmd_tables(o, out);
        else if (*simulate)
            cmd_simulate(o, out);
        else if (*phase)
            cmd_phase(o, out);
        else if (*basins_cmd) {
            if (!cmd_basins(o, out)) {
                err << "error: NoAttractor: the game has no stable fixed point; every grid point is unresolved\n";
                return kNumericFailure;
            }
        } else if (*sweep_cmd)
            cmd_sweep(o, out);
        else if (*abm)
            cmd_abm(o, out);
    } catch (const Error& e) {
        err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
        return is_argument_error(e.code()) ? kBadArguments : kNumericFailure;
    } catch (const std::exception& e) {
        err << "error: Internal: " << e.what() << '\n';
        return kNumericFailure;
    }
    return kSuccess;
}

} // namespace replicator::cli

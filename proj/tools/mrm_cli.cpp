#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "mrm/builtins.hpp"
#include "mrm/driver.hpp"

namespace fs = std::filesystem;
using namespace mrm;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path.string());
    out << text;
}

struct Problem {
    Nrmdp model;
    LabelingFunction labels;
    MealyRewardMachine machine;
    double reset_cost = 0.0;
    DriverConfig config;  // defaults, possibly domain-specific
};

Problem load_problem(const std::string& domain, const std::string& grid_file,
                     const std::string& machine_file) {
    Problem p;
    GridSpec spec;
    if (!domain.empty()) {
        BuiltinDomain d = builtin(domain);
        spec = d.grid;
        p.machine = d.truth;
        p.config = d.config;
    } else {
        if (grid_file.empty() || machine_file.empty())
            throw Error("either --domain or both --grid and --machine are required");
        spec = load_grid(read_file(grid_file));
        p.machine = machine_from_json(read_file(machine_file));
    }
    std::vector<std::string> warnings;
    auto [m, labels] = compile(spec, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    p.model = std::move(m);
    p.labels = std::move(labels);
    p.reset_cost = spec.reset_cost;
    if (p.labels.observation_alphabet != p.machine.alphabet)
        throw AlphabetMismatch("machine alphabet does not match the grid's observations");
    return p;
}

QueryMode parse_mode(const std::string& mode) {
    if (mode == "min") return QueryMode::Min;
    if (mode == "max") return QueryMode::Max;
    throw Error("mode must be min or max");
}

Word parse_word(const std::string& csv, const std::vector<std::string>& alphabet) {
    Word w;
    std::istringstream in(csv);
    std::string sym;
    while (std::getline(in, sym, ',')) {
        auto it = std::find(alphabet.begin(), alphabet.end(), sym);
        if (it == alphabet.end()) throw Error("unknown observation symbol: " + sym);
        w.push_back(static_cast<SymbolId>(it - alphabet.begin()));
    }
    if (w.empty()) throw Error("--word must list at least one symbol");
    return w;
}

int cmd_learn(const Problem& p, const DriverConfig& cfg, const std::string& out_dir) {
    HiddenEnvironment env(p.model, p.labels, p.machine, p.reset_cost, cfg.seed);
    RunLog log = run_active_learning(env, cfg);

    fs::path dir(out_dir);
    fs::create_directories(dir);
    {
        std::ofstream csv(dir / "run.csv", std::ios::binary);
        write_run_csv(log, csv);
    }
    write_file(dir / "summary.json", summary_json(log).dump(2) + "\n");
    if (log.learned) {
        write_file(dir / "learned.json", to_json(*log.learned).dump(2) + "\n");
        write_file(dir / "learned.dot", to_dot(*log.learned));
    }
    std::cout << "steps: " << log.total_steps << "\n"
              << "episodes: " << log.episodes.size() << "\n"
              << "membership queries: " << log.mq_count << "\n"
              << "counterexamples: " << log.ce_count << "\n"
              << "hypotheses: " << log.hypothesis_count << "\n"
              << "final gain: " << format_number(log.final_gain) << "\n"
              << "output: " << dir.string() << "\n";
    return 0;
}

int cmd_solve(const Problem& p) {
    ProductMdp product =
        build_product_with_reset(p.model, p.labels, p.machine, p.reset_cost, true);
    Strategy strat = optimal_mean_payoff(product.model);
    std::cout << "optimal gain: " << format_number(strat.value.front()) << "\n";
    for (StateId x = 0; x < product.model.num_states; ++x) {
        ActionId a = strat.choice[x];
        std::cout << p.model.state_name(product.mdp_state(x)) << " @" << product.node(x)
                  << " -> "
                  << (a == product.reset_action ? std::string("reset") : p.model.action_name(a))
                  << "\n";
    }
    return 0;
}

int cmd_query(const Problem& p, const std::string& word_csv, QueryMode mode, bool execute,
              std::uint64_t seed, long budget) {
    Word word = parse_word(word_csv, p.labels.observation_alphabet);
    QueryMdp q = build_query_mdp(p.model, p.labels, word);
    QueryPlan qp = plan(q, mode);
    if (mode == QueryMode::Max)
        std::cout << "per-attempt success probability: " << format_number(qp.value) << "\n";
    else
        std::cout << "expected steps: " << format_number(qp.value) << "\n";
    if (!execute) return 0;

    HiddenEnvironment env(p.model, p.labels, p.machine, p.reset_cost, seed);
    env.reset();
    auto res = execute_membership_query(env, q, qp.strategy, budget);
    std::cout << "steps used: " << res.model_steps << "\nattempts: " << res.attempts
              << "\nrewards:";
    for (double r : res.rewards) std::cout << " " << format_number(r);
    std::cout << "\n";
    return 0;
}

int cmd_equiv(const std::string& a_file, const std::string& b_file) {
    MealyRewardMachine a = machine_from_json(read_file(a_file));
    MealyRewardMachine b = machine_from_json(read_file(b_file));
    EquivalenceResult r = check_equivalence(a, b);
    if (r.equivalent()) {
        std::cout << "equivalent\n";
        return 0;
    }
    std::cout << "counterexample:";
    for (SymbolId z : *r.counterexample) std::cout << " " << a.alphabet.at(z);
    std::cout << "\n";
    return 1;
}

int cmd_export(const std::string& domain, const std::string& out_dir) {
    BuiltinDomain d = builtin(domain);
    fs::path dir(out_dir);
    fs::create_directories(dir);
    write_file(dir / (domain + ".grid"), d.grid_text);
    write_file(dir / (domain + ".json"), to_json(d.truth).dump(2) + "\n");
    std::cout << "wrote " << (dir / (domain + ".grid")).string() << " and "
              << (dir / (domain + ".json")).string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Active learning of Mealy reward machines in gridworld MDPs"};
    app.require_subcommand(1);

    std::string domain, grid_file, machine_file, out_dir = "out", mode = "min", word_csv;
    double expert = 0.0;
    int episode_len = 0;
    long budget = 0, query_budget = 1'000'000;
    std::uint64_t seed = 1;
    bool execute = false;
    std::string equiv_a, equiv_b;

    auto add_problem_opts = [&](CLI::App* c) {
        c->add_option("--domain", domain, "built-in domain: treasure, office or cube");
        c->add_option("--grid", grid_file, "grid environment file");
        c->add_option("--machine", machine_file, "reward machine JSON file");
    };

    auto* learn = app.add_subcommand("learn", "run the full active-learning loop");
    add_problem_opts(learn);
    learn->add_option("--expert", expert, "expert value V_expert");
    learn->add_option("--episode-len", episode_len, "episode length in steps");
    learn->add_option("--budget", budget, "total environment step budget");
    learn->add_option("--query-budget", query_budget, "per-membership-query step budget");
    learn->add_option("--mode", mode, "membership query planning mode: min or max");
    learn->add_option("--seed", seed, "random seed");
    learn->add_option("--out", out_dir, "output directory");

    auto* solve = app.add_subcommand("solve", "optimal gain and strategy for grid+machine");
    add_problem_opts(solve);

    auto* query = app.add_subcommand("query", "plan (and optionally run) a membership query");
    add_problem_opts(query);
    query->add_option("--word", word_csv, "comma-separated observation symbols")->required();
    query->add_option("--mode", mode, "min or max");
    query->add_flag("--execute", execute, "also run the query against the environment");
    query->add_option("--seed", seed, "random seed for execution");
    query->add_option("--budget", query_budget, "step budget for execution");

    auto* equiv = app.add_subcommand("equiv", "check two machine JSON files for equivalence");
    equiv->add_option("a", equiv_a, "first machine")->required();
    equiv->add_option("b", equiv_b, "second machine")->required();

    auto* exp = app.add_subcommand("export", "write a built-in domain's grid and machine files");
    exp->add_option("--domain", domain, "built-in domain name")->required();
    exp->add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (equiv->parsed()) return cmd_equiv(equiv_a, equiv_b);
        if (exp->parsed()) return cmd_export(domain, out_dir);

        Problem p = load_problem(domain, grid_file, machine_file);
        if (solve->parsed()) return cmd_solve(p);
        if (query->parsed())
            return cmd_query(p, word_csv, parse_mode(mode), execute, seed, query_budget);

        DriverConfig cfg = p.config;
        if (learn->count("--expert")) cfg.v_expert = expert;
        if (learn->count("--episode-len")) cfg.episode_length = episode_len;
        if (learn->count("--budget")) cfg.total_step_budget = budget;
        if (learn->count("--query-budget")) cfg.query_step_budget = query_budget;
        if (learn->count("--mode")) cfg.mode = parse_mode(mode);
        cfg.seed = seed;
        return cmd_learn(p, cfg, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

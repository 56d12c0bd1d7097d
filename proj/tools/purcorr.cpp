// purcorr: purifications, factorability and correlation witnesses for bipartite states.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "purcorr/commands.hpp"

namespace {

using namespace purcorr;
using namespace purcorr::cli;

std::string read_file(const std::string& path) {
	std::ifstream in(path, std::ios::binary);
	if (!in) throw std::runtime_error("cannot open " + path);
	std::ostringstream ss;
	ss << in.rdbuf();
	return ss.str();
}

Observable resolve_observable(const std::string& arg) {
	if (auto named = named_observable(arg)) return *named;
	return parse_observable_file(read_file(arg));
}

std::vector<std::string> split_labels(const std::string& s) {
	std::vector<std::string> out;
	std::string cur;
	for (char c : s) {
		if (c == ',') {
			if (!cur.empty()) out.push_back(cur);
			cur.clear();
		} else if (!std::isspace(static_cast<unsigned char>(c))) {
			cur += c;
		}
	}
	if (!cur.empty()) out.push_back(cur);
	return out;
}

} // namespace

int main(int argc, char** argv) {
	CLI::App app{"Purifications, factorability and correlation witnesses of bipartite quantum states"};
	app.require_subcommand(1);
	bool json = false, quiet = false;
	app.add_flag("--json", json, "Machine-readable JSON output");
	app.add_flag("--quiet", quiet, "Suppress the report; only the exit status (and written files) remain");

	std::string file, trace_out, output, ancilla, dims = "2x2", obs_a, obs_b, compare, compare_trace_out;
	AnalyzeOptions analyze_opts;
	PurifyOptions purify_opts;
	VerifyOptions verify_opts;
	SampleOptions sample_opts;
	std::uint64_t unitary_seed = 0;

	auto* analyze = app.add_subcommand("analyze", "Marginals, ||Delta||_F, factorability and the correlation witness");
	analyze->add_option("file", file, "State file")->required();
	analyze->add_option("--tol", analyze_opts.tolerance, "Factorability tolerance on ||Delta||_F");
	analyze->add_option("--trace-out", trace_out, "Comma-separated factor labels to trace out of a pure state");

	auto* purify_cmd = app.add_subcommand("purify", "Purify a density matrix and report its entanglement");
	purify_cmd->add_option("file", file, "Density-matrix file")->required();
	auto* ancilla_opt = purify_cmd->add_option("--ancilla-dims", ancilla, "Split the ancilla as C1,C2 dimensions a,b");
	auto* seed_opt = purify_cmd->add_option("--unitary-seed", unitary_seed, "Apply a seeded Haar unitary to the ancilla");
	purify_cmd->add_option("-o,--output", output, "Write the purification here instead of stdout");

	auto* verify = app.add_subcommand("verify", "Seeded verification campaign for theorem 1 or 2");
	verify->add_option("--theorem", verify_opts.theorem, "1: purifications entangled; 2: correlated witness")
	    ->required()
	    ->check(CLI::IsMember({1, 2}));
	verify->add_option("--dims", dims, "Subsystem dimensions, e.g. 2x2");
	verify->add_option("--trials", verify_opts.trials, "Random states per ensemble")->required();
	verify->add_option("--seed", verify_opts.seed, "Campaign seed")->required();
	verify->add_option("--tol", verify_opts.tolerance, "Factorability tolerance on ||Delta||_F");
	verify->add_option("--unitaries", verify_opts.unitaries, "Theorem 1: Haar ancilla unitaries per state");

	auto* sample = app.add_subcommand("sample", "Simulate joint projective measurements");
	sample->add_option("file", file, "State file")->required();
	sample->add_option("--obs-a", obs_a, "Observable on A: x, y, z, i or an observable file")->required();
	sample->add_option("--obs-b", obs_b, "Observable on B: x, y, z, i or an observable file")->required();
	sample->add_option("--trials", sample_opts.trials, "Number of joint measurements")->required();
	sample->add_option("--seed", sample_opts.seed, "Sampling seed")->required();
	sample->add_option("--trace-out", trace_out, "Comma-separated factor labels to trace out of a pure state");
	sample->add_option("--compare", compare, "Second state file to test for an identical joint distribution");
	sample->add_option("--compare-trace-out", compare_trace_out, "Labels to trace out of the comparison state");

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError& e) {
		const int code = app.exit(e);
		return code == 0 ? kExitPass : kExitInputError;
	}

	try {
		CommandResult result;
		if (*analyze) {
			analyze_opts.json = json;
			analyze_opts.trace_out = split_labels(trace_out);
			result = cmd_analyze(read_file(file), analyze_opts);
		} else if (*purify_cmd) {
			purify_opts.json = json;
			if (*ancilla_opt) {
				const auto parts = split_labels(ancilla);
				if (parts.size() != 2) throw DimensionError("--ancilla-dims expects two comma-separated dimensions");
				purify_opts.ancilla_dims = {std::stoul(parts[0]), std::stoul(parts[1])};
			}
			if (*seed_opt) purify_opts.unitary_seed = unitary_seed;
			result = cmd_purify(read_file(file), purify_opts);
			if (!output.empty()) {
				std::ofstream out(output, std::ios::binary);
				if (!out) throw std::runtime_error("cannot write " + output);
				out << *result.state_file;
			} else {
				// the state file owns stdout; the report moves to stderr
				std::cout << *result.state_file;
				if (!quiet) std::cerr << result.output;
				return result.exit_code;
			}
		} else if (*verify) {
			verify_opts.json = json;
			verify_opts.dims = parse_dims(dims);
			result = cmd_verify(verify_opts);
		} else if (*sample) {
			sample_opts.json = json;
			sample_opts.trace_out = split_labels(trace_out);
			if (!compare.empty()) {
				sample_opts.compare_text = read_file(compare);
				sample_opts.compare_trace_out = split_labels(compare_trace_out);
			}
			result = cmd_sample(read_file(file), resolve_observable(obs_a), resolve_observable(obs_b), sample_opts);
		}
		if (!quiet) std::cout << result.output;
		return result.exit_code;
	} catch (const std::exception& e) {
		std::cerr << "error: " << e.what() << '\n';
		return kExitInputError;
	}
}

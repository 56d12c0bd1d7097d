#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "purcorr/rng.hpp"

namespace purcorr {

/// Shortest decimal string that parses back to exactly `x`.
inline std::string format_double(double x) {
	char buf[64];
	auto res = std::to_chars(buf, buf + sizeof buf, x);
	return std::string(buf, res.ptr);
}

/// Result of a seeded theorem-verification campaign. Passing means no counterexamples.
struct TheoremReport {
	int theorem = 0;
	std::string ensemble;
	std::uint64_t seed = 0;
	std::size_t trials = 0;

	std::size_t states_checked = 0;
	std::size_t factorable_states = 0;
	std::size_t nonfactorable_states = 0;
	std::size_t purifications_checked = 0;

	// Theorem 1: AC1|BC2 entropies (bits) over sampled purifications of non-factorable states,
	// and the largest factored-purification entropy of factorable ones.
	std::optional<double> min_entropy_bits;
	std::optional<double> max_entropy_bits;
	std::optional<double> max_factored_entropy_bits;

	// Theorem 2: witness covariances split by the factorability verdict.
	std::optional<double> max_factorable_covariance;
	std::optional<double> min_nonfactorable_covariance;

	std::vector<std::string> counterexamples;
	std::vector<std::pair<std::string, double>> tolerances;
	std::string generator{Rng::kAlgorithm};

	bool passed() const noexcept { return counterexamples.empty(); }

	void note_min(std::optional<double>& slot, double v) { slot = slot ? std::min(*slot, v) : v; }
	void note_max(std::optional<double>& slot, double v) { slot = slot ? std::max(*slot, v) : v; }

	/// Folds another report over the same theorem into this one.
	void absorb(const TheoremReport& o) {
		states_checked += o.states_checked;
		factorable_states += o.factorable_states;
		nonfactorable_states += o.nonfactorable_states;
		purifications_checked += o.purifications_checked;
		if (o.min_entropy_bits) note_min(min_entropy_bits, *o.min_entropy_bits);
		if (o.max_entropy_bits) note_max(max_entropy_bits, *o.max_entropy_bits);
		if (o.max_factored_entropy_bits) note_max(max_factored_entropy_bits, *o.max_factored_entropy_bits);
		if (o.max_factorable_covariance) note_max(max_factorable_covariance, *o.max_factorable_covariance);
		if (o.min_nonfactorable_covariance) note_min(min_nonfactorable_covariance, *o.min_nonfactorable_covariance);
		counterexamples.insert(counterexamples.end(), o.counterexamples.begin(), o.counterexamples.end());
		if (tolerances.empty()) tolerances = o.tolerances;
	}

	nlohmann::ordered_json to_json() const {
		auto opt = [](const std::optional<double>& v) -> nlohmann::ordered_json {
			return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
		};
		nlohmann::ordered_json j;
		j["theorem"] = theorem;
		j["ensemble"] = ensemble;
		j["seed"] = seed;
		j["trials"] = trials;
		j["pass"] = passed();
		j["states_checked"] = states_checked;
		j["factorable_states"] = factorable_states;
		j["nonfactorable_states"] = nonfactorable_states;
		j["purifications_checked"] = purifications_checked;
		j["min_entropy_bits"] = opt(min_entropy_bits);
		j["max_entropy_bits"] = opt(max_entropy_bits);
		j["max_factored_entropy_bits"] = opt(max_factored_entropy_bits);
		j["max_factorable_covariance"] = opt(max_factorable_covariance);
		j["min_nonfactorable_covariance"] = opt(min_nonfactorable_covariance);
		j["counterexamples"] = counterexamples;
		nlohmann::ordered_json t = nlohmann::ordered_json::object();
		for (const auto& [name, value] : tolerances) t[name] = value;
		j["tolerances"] = t;
		j["generator"] = generator;
		return j;
	}

	std::string to_text() const {
		std::ostringstream os;
		auto line = [&](const std::string& key, const std::string& value) { os << "  " << key << ": " << value << '\n'; };
		auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("n/a"); };
		os << "Theorem " << theorem << " verification: " << (passed() ? "PASS" : "FAIL") << '\n';
		line("ensemble", ensemble);
		line("seed", std::to_string(seed));
		line("trials", std::to_string(trials));
		line("states checked", std::to_string(states_checked) + " (" + std::to_string(nonfactorable_states) +
		                           " non-factorable, " + std::to_string(factorable_states) + " factorable)");
		if (theorem == 1) {
			line("purifications checked", std::to_string(purifications_checked));
			line("min AC1|BC2 entropy (bits)", opt(min_entropy_bits));
			line("max AC1|BC2 entropy (bits)", opt(max_entropy_bits));
			line("max factored-purification entropy (bits)", opt(max_factored_entropy_bits));
		} else {
			line("max witness covariance, factorable", opt(max_factorable_covariance));
			line("min witness covariance, non-factorable", opt(min_nonfactorable_covariance));
		}
		line("counterexamples", std::to_string(counterexamples.size()));
		for (const auto& c : counterexamples) os << "    - " << c << '\n';
		for (const auto& [name, value] : tolerances) line("tolerance " + name, format_double(value));
		line("generator", generator);
		return os.str();
	}
};

} // namespace purcorr

#pragma once

#include "dlneb/verification.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace dlneb::io {

using Json = nlohmann::ordered_json;

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite values serialize as null and read back as NaN.
Json num(double v);
double as_num(const Json& j);

// Enum names as printed by to_string; unknown names raise ParseError.
PerturbationMode parse_mode(const std::string& s);
CounterexampleKind parse_counterexample_kind(const std::string& s); // also accepts "l2" / "l3"
ModelKind parse_model_kind(const std::string& s);
Activation parse_activation(const std::string& s);
InitScheme parse_init(const std::string& s);
Termination parse_termination(const std::string& s);

Json to_json(const std::vector<ScalarRoot>& roots);
Json to_json(const AssumptionReport& r);

// {"columns": {name: value, ...}, "global_truncated": bool}
Json to_json(const EbLedger& l);
using LedgerEntries = std::vector<std::pair<std::string, double>>;
LedgerEntries ledger_entries_from_json(const Json& j);
Json ledger_json(const LedgerEntries& e, bool global_truncated);

Json to_json(const VerificationReport& r);
VerificationReport verification_from_json(const Json& j);

Json to_json(const BalanceReport& r);
BalanceReport balance_from_json(const Json& j);

Json to_json(const CounterexampleFit& f);
CounterexampleFit counterexample_from_json(const Json& j);

Json to_json(const FirstOrderReport& r);
FirstOrderReport first_order_from_json(const Json& j);

Json to_json(const RateFit& f);
RateFit rate_fit_from_json(const Json& j);

Json to_json(const std::vector<Section4Row>& rows);
std::vector<Section4Row> section4_from_json(const Json& j);

// Final summary of a run (no per-step data; that goes to CSV).
Json trajectory_summary(const Trajectory& t);

// Pretty-printed with a trailing newline; the canonical byte form of a report.
std::string dump(const Json& j);
Json parse(const std::string& text);
Json read_json_file(const std::filesystem::path& p);
void write_text_file(const std::filesystem::path& p, const std::string& text);

// CSV writers. Column orders are fixed and listed by the *_columns functions.
const std::vector<std::string>& sample_columns();
const std::vector<std::string>& trajectory_columns();
const std::vector<std::string>& section4_columns();
const std::vector<std::string>& counterexample_columns();
void write_samples_csv(std::ostream& os, const VerificationReport& r);
void write_trajectory_csv(std::ostream& os, const Trajectory& t);
void write_section4_csv(std::ostream& os, const std::vector<Section4Row>& rows);
void write_counterexample_csv(std::ostream& os, const CounterexampleFit& f);
void write_ledger_csv(std::ostream& os, const EbLedger& l); // header row of names, one value row

// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double v);

} // namespace dlneb::io

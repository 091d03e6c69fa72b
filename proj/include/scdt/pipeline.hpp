#ifndef SCDT_PIPELINE_HPP
#define SCDT_PIPELINE_HPP

#include "scdt/emulator.hpp"
#include "scdt/governance.hpp"
#include "scdt/scor_catalog.hpp"
#include "scdt/subdt.hpp"
#include "scdt/topology.hpp"

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace scdt {

/// Manifest paths are resolved against the manifest's directory.
struct RunManifest {
    std::filesystem::path topology;
    std::filesystem::path scenario;
    std::filesystem::path catalog;
    std::filesystem::path governance;
    std::filesystem::path out;
    std::optional<std::uint64_t> seed; ///< overrides the scenario and network seeds
};

/// Errors: cli_runner.IoError, cli_runner.ParseError.
RunManifest load_manifest(const std::string& path);

struct Inputs {
    SupplyChainSystem system;
    std::shared_ptr<const Catalog> catalog;
    Scenario scenario;
    GovernanceConfig governance;
    ValidationReport validation;
};

/// Loads and parses every manifest file and validates the topology against the catalog.
Inputs load_inputs(const RunManifest& manifest);

/// Exit-status class of an error: 1 domain, 2 I/O or parse.
int exit_status(const Error& error) noexcept;

/// Writes the validation report to `out`; returns 0 when the topology is
/// valid and every file loads, 1 otherwise. I/O and parse failures throw.
int cmd_validate(const RunManifest& manifest, std::ostream& out);

struct RunSummary {
    std::filesystem::path out;
    std::size_t events = 0;
    std::uint64_t events_hash = 0;
    std::vector<std::string> files;
};

/// Full pipeline into `manifest.out`:
/// structure.txt validation.txt events.tsv metrics.tsv divergence.tsv
/// rollups.tsv trace.tsv quality.txt sos.txt report.txt.
/// Errors: topology.Invalid plus every module's errors.
RunSummary cmd_run(const RunManifest& manifest);

/// Recomposes the report from a run's exported files; no metric is recomputed.
/// Errors: cli_runner.IoError when an export is missing.
std::string cmd_report(const RunManifest& manifest);

/// `KEY=FACTOR` with KEY in demand, capacity, lead_time. Errors: cli_runner.BadPerturbation.
Perturbation parse_perturbation(const std::vector<std::string>& items);

struct WhatIfRow {
    std::string code;
    std::optional<Rational> baseline;
    std::optional<Rational> predicted;

    std::optional<Rational> delta() const;
};

/// Baseline (identity what-if) against the perturbed prediction for one member,
/// from the events of a completed run.
/// Errors: topology.UnknownReference, cli_runner.IoError, subdt.ModelNotWarm, subdt.BadPerturbation.
std::vector<WhatIfRow> cmd_whatif(const RunManifest& manifest, const std::string& member,
                                  const Perturbation& perturbation);

std::string render_whatif(const std::string& member, const std::vector<WhatIfRow>& rows);

} // namespace scdt

#endif // SCDT_PIPELINE_HPP

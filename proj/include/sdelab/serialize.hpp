#pragma once

#include <json.hpp>
#include <ostream>
#include <string>

#include "sdelab/coefficients.hpp"
#include "sdelab/core.hpp"
#include "sdelab/ensemble.hpp"
#include "sdelab/fixedpoint.hpp"
#include "sdelab/law.hpp"
#include "sdelab/probes.hpp"
#include "sdelab/recurrence.hpp"
#include "sdelab/stability.hpp"

// JSON and CSV views of every report type. JSON objects use nlohmann's
// default (sorted-key) representation so identical data serializes to
// identical bytes.

namespace sdelab {

using json = nlohmann::json;

json to_json(const UniformGrid& g);
json to_json(const SampledPath& p);
json to_json(const MomentSeries& m);
json to_json(const AlmostPeriodReport& r);
json to_json(const ContractionReport& r);
json to_json(const FixedPointTrace& t);   // summary; states go to CSV
json to_json(const BoundCheckReport& r);
json to_json(const LawDistanceSeries& s);
json to_json(const ComparabilityProbeReport& r);
json to_json(const AuditReport& r);

/// header t,v1..vdim
void write_path_csv(std::ostream& os, const SampledPath& p);
/// wide layout: t, then one column per path (component-major for dim > 1)
void write_ensemble_csv_wide(std::ostream& os, const StochasticEnsemble& e);
/// one block per replicate, rows t,v1..vdim
void write_ensemble_csv_replicate(std::ostream& os, const StochasticEnsemble& e,
                                  std::size_t replicate);
/// t, measured, stderr, bound
void write_bound_report_csv(std::ostream& os, const BoundCheckReport& r);
/// t, beta
void write_law_series_csv(std::ostream& os, const LawDistanceSeries& s);

SampledPath path_from_json(const json& j);

}  // namespace sdelab

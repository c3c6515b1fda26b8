#pragma once

#include <filesystem>
#include <string>

#include "ibs/attribution.hpp"
#include "ibs/datagen.hpp"
#include "ibs/dataset.hpp"
#include "ibs/network.hpp"
#include "ibs/search.hpp"

namespace ibs {

// Shortest exact decimal form that round-trips to the same double.
std::string format_double(double v);

// Dataset CSV: one "# {json}" metadata line (name, seed, informative
// indices), then rows "f0,...,f(d-1),label". Values round-trip exactly.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_dataset_csv(const std::filesystem::path& path);

// Model JSON: spec, row-major weights, biases, training seed. Lossless.
void write_model_json(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel read_model_json(const std::filesystem::path& path);

// Boundary samples CSV: "# {json}" line with the search config and failure
// counts, then rows "x0,...,x(d-1),prediction,steps,converged". Start points
// and traces are not persisted.
void write_boundary_csv(const std::filesystem::path& path,
                        const BoundarySampleSet& set, const SearchConfig& config);
BoundarySampleSet read_boundary_csv(const std::filesystem::path& path,
                                    SearchConfig* config_out = nullptr);

// Attribution CSV: "feature,delta,cumulated_gradient,value" rows.
void write_attribution_csv(const std::filesystem::path& path, const Attribution& a);

// Brain layout: PGM mask image (0 outside, 255 inside) plus a JSON sidecar
// holding sizes, sigma and informative pixel indices.
void write_brain_layout(const std::filesystem::path& pgm_path,
                        const std::filesystem::path& json_path,
                        const BrainLayout& layout);
BrainLayout read_brain_layout(const std::filesystem::path& pgm_path,
                              const std::filesystem::path& json_path);

}  // namespace ibs

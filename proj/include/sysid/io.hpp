#pragma once

#include <string>

#include <json.hpp>

#include "sysid/harness.hpp"

namespace sysid {

using json = nlohmann::json;

// shortest round-trip formatting; parse rejects trailing garbage
std::string fmt_double(double v);
double parse_double(const std::string& s);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& body);
json load_json_file(const std::string& path);

void to_json(json& j, const Matrix& m);
void from_json(const json& j, Matrix& m);

void to_json(json& j, const SystemSpec& s);
void from_json(const json& j, SystemSpec& s);

// {n, rho, opnorm, psi, entries} with entries in row-major order
void to_json(json& j, const SystemMatrix& s);
void from_json(const json& j, SystemMatrix& s);

void to_json(json& j, const NoiseModel& m);
void from_json(const json& j, NoiseModel& m);

void to_json(json& j, const AttackStrategy& a);
void from_json(const json& j, AttackStrategy& a);

void to_json(json& j, const AttackSchedule& s);
void from_json(const json& j, AttackSchedule& s);

void to_json(json& j, const TrajectoryRecord& r);
void from_json(const json& j, TrajectoryRecord& r);

// Long-format CSV: t, x_0..x_{n-1}, w_*, v_*, xi_*; the t = T row carries
// states only (w/v/xi columns empty). Values survive the round trip bitwise.
std::string trajectory_to_csv(const TrajectoryRecord& r);
void trajectory_states_from_csv(const std::string& body, std::size_t n,
                                std::vector<Vec>& states, std::vector<Vec>& noise,
                                std::vector<Vec>& attacks, std::vector<std::vector<std::uint8_t>>& xi);

void to_json(json& j, const LadConfig& c);
void from_json(const json& j, LadConfig& c);

void to_json(json& j, const SolverReport& r);
void from_json(const json& j, SolverReport& r);

void to_json(json& j, const ThresholdParams& p);
void from_json(const json& j, ThresholdParams& p);

void to_json(json& j, const RankingParams& p);
void from_json(const json& j, RankingParams& p);

void to_json(json& j, const FilterResult& f);
void from_json(const json& j, FilterResult& f);

std::string retained_to_csv(const FilterResult& f);  // bitmap, row per t

void to_json(json& j, const DetectionMetrics& d);
void from_json(const json& j, DetectionMetrics& d);

void to_json(json& j, const TwoStageConfig& c);
void from_json(const json& j, TwoStageConfig& c);

void to_json(json& j, const BoundParams& b);
void from_json(const json& j, BoundParams& b);

void to_json(json& j, const PipelineReport& r);

void to_json(json& j, const FailureDemoParams& f);
void from_json(const json& j, FailureDemoParams& f);

// Accepts {"preset": name} plus field-level overrides on top of the preset.
void to_json(json& j, const ExperimentConfig& c);
void from_json(const json& j, ExperimentConfig& c);

void to_json(json& j, const ExperimentRow& r);
void from_json(const json& j, ExperimentRow& r);

void to_json(json& j, const MedianRow& r);
void from_json(const json& j, MedianRow& r);

void to_json(json& j, const ScatterPoint& p);
void from_json(const json& j, ScatterPoint& p);

void to_json(json& j, const ExperimentReport& r);
void from_json(const json& j, ExperimentReport& r);

std::string rows_to_csv(const std::vector<ExperimentRow>& rows);
std::string medians_to_csv(const std::vector<MedianRow>& rows);
std::string scatter_to_csv(const std::vector<ScatterPoint>& pts);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace sysid

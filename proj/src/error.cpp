// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#include "soap/error.hpp"

namespace soap {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::non_planar_pose: return "non-planar-pose";
    case Errc::empty_sequence: return "empty-sequence";
    case Errc::missing_cloud: return "missing-cloud";
    case Errc::frame_sequence_mismatch: return "frame-sequence-mismatch";
    case Errc::zero_total_points: return "zero-total-points";
    case Errc::zero_total_score: return "zero-total-score";
    case Errc::degenerate_labels: return "degenerate-labels";
    case Errc::non_finite_likelihood: return "non-finite-likelihood";
    case Errc::invalid_spec: return "invalid-spec";
    case Errc::frame_misalignment: return "frame-misalignment";
    case Errc::bad_magic: return "bad-magic";
    case Errc::unsupported_version: return "unsupported-version";
    case Errc::truncated_file: return "truncated-file";
    case Errc::trailing_data: return "trailing-data";
    case Errc::non_finite_values: return "non-finite-values";
    case Errc::parse_error: return "parse-error";
    case Errc::invariant_violation: return "invariant-violation";
    case Errc::io_error: return "io-error";
    case Errc::config_invalid: return "config-invalid";
    case Errc::input_missing: return "input-missing";
    case Errc::stage_failure: return "stage-failure";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      detail_(message) {}

}  // namespace soap

// Copyright 2026 The soap-labels Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SOAP_ERROR_HPP
#define SOAP_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace soap {

/// Error categories surfaced by the library. The CLI maps these onto exit
/// codes, so keep the names stable.
enum class Errc {
  invalid_argument,
  non_planar_pose,
  empty_sequence,
  missing_cloud,
  frame_sequence_mismatch,
  zero_total_points,
  zero_total_score,
  degenerate_labels,
  non_finite_likelihood,
  invalid_spec,
  frame_misalignment,
  bad_magic,
  unsupported_version,
  truncated_file,
  trailing_data,
  non_finite_values,
  parse_error,
  invariant_violation,
  io_error,
  config_invalid,
  input_missing,
  stage_failure,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }
  /// Message without the category prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace soap

#endif  // SOAP_ERROR_HPP

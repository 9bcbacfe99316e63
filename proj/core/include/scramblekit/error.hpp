#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scramblekit {

enum class Errc {
  invalid_argument,
  derangement_infeasible,
  invalid_span,
  empty_corpus,
  empty_reference,
  misaligned,
  zero_denominator,
  protocol_error,
  timeout,
  empty_sentence,
  all_tokens_skipped,
  parse_error,
  invalid_mask_index,
  duplicate_id,
  missing_number_class,
  empty_class,
  all_skipped,
  io_error,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers can branch on the condition without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace scramblekit

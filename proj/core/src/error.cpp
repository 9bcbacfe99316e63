#include "scramblekit/error.hpp"

namespace scramblekit {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::derangement_infeasible: return "DerangementInfeasible";
    case Errc::invalid_span: return "InvalidSpan";
    case Errc::empty_corpus: return "EmptyCorpus";
    case Errc::empty_reference: return "EmptyReference";
    case Errc::misaligned: return "Misaligned";
    case Errc::zero_denominator: return "ZeroDenominator";
    case Errc::protocol_error: return "ProtocolError";
    case Errc::timeout: return "Timeout";
    case Errc::empty_sentence: return "EmptySentence";
    case Errc::all_tokens_skipped: return "AllTokensSkipped";
    case Errc::parse_error: return "ParseError";
    case Errc::invalid_mask_index: return "InvalidMaskIndex";
    case Errc::duplicate_id: return "DuplicateId";
    case Errc::missing_number_class: return "MissingNumberClass";
    case Errc::empty_class: return "EmptyClass";
    case Errc::all_skipped: return "AllSkipped";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

}  // namespace scramblekit

#pragma once

#include <stdexcept>
#include <string>

namespace haptex {

// Error taxonomy shared by every module. All failures surfaced to callers are
// one of these; the CLI maps them onto process exit codes.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define HAPTEX_DEFINE_ERROR(Name)                            \
  class Name : public Error {                                \
   public:                                                   \
    explicit Name(const std::string& what) : Error(what) {}  \
  }

HAPTEX_DEFINE_ERROR(ArgError);
HAPTEX_DEFINE_ERROR(IngestError);
HAPTEX_DEFINE_ERROR(CropError);
HAPTEX_DEFINE_ERROR(FilterError);
HAPTEX_DEFINE_ERROR(ShapeError);
HAPTEX_DEFINE_ERROR(NormalError);
HAPTEX_DEFINE_ERROR(SegmentError);
HAPTEX_DEFINE_ERROR(SequenceError);
HAPTEX_DEFINE_ERROR(FormatError);
HAPTEX_DEFINE_ERROR(GlcmError);
HAPTEX_DEFINE_ERROR(ConfigError);
HAPTEX_DEFINE_ERROR(ManifestError);
HAPTEX_DEFINE_ERROR(AggregateError);
HAPTEX_DEFINE_ERROR(TrainingAbort);

#undef HAPTEX_DEFINE_ERROR

}  // namespace haptex

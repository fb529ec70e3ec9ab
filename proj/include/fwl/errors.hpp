#pragma once

#include <stdexcept>
#include <string>

namespace fwl {

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define FWL_DEFINE_ERROR(Name)                                  \
  struct Name : Error {                                         \
    explicit Name(const std::string& what) : Error(what) {}     \
  }

FWL_DEFINE_ERROR(DimensionMismatch);
FWL_DEFINE_ERROR(NotPositiveDefinite);
FWL_DEFINE_ERROR(NegativeSd);
FWL_DEFINE_ERROR(NonFiniteValue);
FWL_DEFINE_ERROR(EmptyTrainingSet);
FWL_DEFINE_ERROR(KTooLarge);
FWL_DEFINE_ERROR(BadDimension);
FWL_DEFINE_ERROR(NonDistributionTarget);
FWL_DEFINE_ERROR(NonFiniteGradient);
FWL_DEFINE_ERROR(EmptyDataset);
FWL_DEFINE_ERROR(MissingConfidences);
FWL_DEFINE_ERROR(EmptyRange);
FWL_DEFINE_ERROR(BadClassCount);
FWL_DEFINE_ERROR(BothZero);
FWL_DEFINE_ERROR(NegativeInput);
FWL_DEFINE_ERROR(ConfigParse);
FWL_DEFINE_ERROR(Io);

#undef FWL_DEFINE_ERROR

}  // namespace fwl

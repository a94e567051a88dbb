#pragma once

#include <stdexcept>
#include <string>

namespace s2vntm {

// Base for every error the library raises. Callers that only need a message
// can catch this; the service maps the concrete types onto HTTP statuses.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define S2VNTM_DEFINE_ERROR(Name)            \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

// corpus
S2VNTM_DEFINE_ERROR(EmptyVocabulary);
S2VNTM_DEFINE_ERROR(DocumentDropped);
S2VNTM_DEFINE_ERROR(ClassEmpty);
S2VNTM_DEFINE_ERROR(InvalidSeeds);

// embeddings / io
S2VNTM_DEFINE_ERROR(DimensionMismatch);
S2VNTM_DEFINE_ERROR(FileUnreadable);
S2VNTM_DEFINE_ERROR(FormatError);

// vmf
S2VNTM_DEFINE_ERROR(DomainError);
S2VNTM_DEFINE_ERROR(SamplerStuck);

// model / eval / trainer
S2VNTM_DEFINE_ERROR(ShapeMismatch);
S2VNTM_DEFINE_ERROR(IndexError);
S2VNTM_DEFINE_ERROR(NoMatchedTopics);
S2VNTM_DEFINE_ERROR(LengthMismatch);
S2VNTM_DEFINE_ERROR(DivergenceDetected);
S2VNTM_DEFINE_ERROR(VocabularyMismatch);
S2VNTM_DEFINE_ERROR(ConfigError);

// workbench
S2VNTM_DEFINE_ERROR(NotFound);
S2VNTM_DEFINE_ERROR(BadRequest);
S2VNTM_DEFINE_ERROR(StateConflict);

#undef S2VNTM_DEFINE_ERROR

}  // namespace s2vntm

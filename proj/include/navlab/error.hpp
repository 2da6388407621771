#pragma once

#include <stdexcept>
#include <string>

namespace navlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define NAVLAB_ERROR(Name)                  \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  }

NAVLAB_ERROR(DimensionError);
NAVLAB_ERROR(DegenerateMaskError);
NAVLAB_ERROR(EvaluationError);
NAVLAB_ERROR(DisconnectedError);
NAVLAB_ERROR(ValidationError);
NAVLAB_ERROR(GenerationExhaustedError);
NAVLAB_ERROR(VocabError);
NAVLAB_ERROR(LengthError);
NAVLAB_ERROR(IllegalMoveError);
NAVLAB_ERROR(LabelError);
NAVLAB_ERROR(EmptyInputError);
NAVLAB_ERROR(ReferenceError);
NAVLAB_ERROR(TrajectoryError);
NAVLAB_ERROR(ConfigError);
NAVLAB_ERROR(IoError);
NAVLAB_ERROR(CheckpointError);
NAVLAB_ERROR(TrainingError);

#undef NAVLAB_ERROR

}  // namespace navlab

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace trelab {

// Base of every error raised by the library. The category decides how the
// command-line front end maps it to an exit code.
class Error : public std::runtime_error {
 public:
  enum class Category { kUser, kInternal };

  explicit Error(const std::string& what, Category category = Category::kInternal)
      : std::runtime_error(what), category_(category) {}

  Category category() const noexcept { return category_; }
  bool is_user_error() const noexcept { return category_ == Category::kUser; }

 private:
  Category category_;
};

#define TRELAB_DEFINE_ERROR(Name, category)                                 \
  class Name : public Error {                                               \
   public:                                                                  \
    explicit Name(const std::string& what) : Error(what, category) {}       \
  }

// Shape disagreement between operands.
TRELAB_DEFINE_ERROR(DimensionError, Category::kInternal);
// Token, label or target id outside its valid range.
TRELAB_DEFINE_ERROR(IndexError, Category::kUser);
// Sequence longer than the model context window.
TRELAB_DEFINE_ERROR(LengthError, Category::kUser);
// Invalid hyperparameter, flag combination or mismatched artifacts.
TRELAB_DEFINE_ERROR(ConfigError, Category::kUser);
// Empty or otherwise unusable input.
TRELAB_DEFINE_ERROR(InputError, Category::kUser);
// Malformed file content; messages carry a line or record position.
TRELAB_DEFINE_ERROR(ParseError, Category::kUser);
// Well-formed input that violates a semantic constraint (e.g. a span out of bounds).
TRELAB_DEFINE_ERROR(ValidationError, Category::kUser);
// Masking strategy not applicable to the data.
TRELAB_DEFINE_ERROR(StrategyError, Category::kUser);
// Caller broke an API precondition.
TRELAB_DEFINE_ERROR(ContractError, Category::kUser);
// Learning-rate schedule queried outside its domain.
TRELAB_DEFINE_ERROR(ScheduleError, Category::kInternal);
// Non-finite values reached the optimizer.
TRELAB_DEFINE_ERROR(NumericError, Category::kInternal);

#undef TRELAB_DEFINE_ERROR

}  // namespace trelab

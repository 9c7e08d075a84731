/*
   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace exchbound {

enum class ErrorCode {
  InvalidModel,
  InvalidArgument,
  InvalidT,
  InvalidH,
  InvalidDelta,
  OutOfValidityRange,
  DomainError,
  MeanOutOfRange,
  UnsupportedModel,
  KTooLarge,
  MTooLarge,
  EmptyGrid,
  QuadratureFailure,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidT: return "InvalidT";
    case ErrorCode::InvalidH: return "InvalidH";
    case ErrorCode::InvalidDelta: return "InvalidDelta";
    case ErrorCode::OutOfValidityRange: return "OutOfValidityRange";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::MeanOutOfRange: return "MeanOutOfRange";
    case ErrorCode::UnsupportedModel: return "UnsupportedModel";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::MTooLarge: return "MTooLarge";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace exchbound

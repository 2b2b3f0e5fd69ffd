#include "rvqmotion/common/log.h"

#include <iostream>
#include <utility>

namespace rvqmotion {

namespace {

WarningSink& sink() {
  static WarningSink s;
  return s;
}

} // namespace

void warn(std::string_view message) {
  if (sink()) {
    sink()(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

WarningSink set_warning_sink(WarningSink s) {
  return std::exchange(sink(), std::move(s));
}

} // namespace rvqmotion

#include "revdetect/log.hpp"

#include <iostream>
#include <mutex>

namespace revdetect::log {

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

Sink& current() {
  static Sink s = [](Level lvl, std::string_view msg) {
    std::cerr << (lvl == Level::Warning ? "warning: " : "") << msg << '\n';
  };
  return s;
}

void emit(Level lvl, std::string_view msg) {
  std::lock_guard lock(sink_mutex());
  if (current()) current()(lvl, msg);
}

}  // namespace

Sink set_sink(Sink sink) {
  std::lock_guard lock(sink_mutex());
  Sink old = std::move(current());
  current() = std::move(sink);
  return old;
}

void info(std::string_view msg) { emit(Level::Info, msg); }
void warn(std::string_view msg) { emit(Level::Warning, msg); }

}  // namespace revdetect::log

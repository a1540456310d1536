#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dgfair {

// Errors raised by the library carry a plain message; callers that need the
// offending line or field get it embedded in the text.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

void log_warn(const std::string& msg);
void log_info(const std::string& msg);
void set_quiet(bool quiet);

std::vector<std::string> split(const std::string& line, char delim);

// True if s parses completely as a base-10 integer (optional leading minus).
bool is_integer(const std::string& s);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace dgfair

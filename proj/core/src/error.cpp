#include "adq/error.hpp"

namespace adq {

void throw_validation(const std::string& what) { throw ValidationError(what); }
void throw_format(const std::string& what) { throw FormatError(what); }
void throw_io(const std::string& what) { throw IoError(what); }

}  // namespace adq

#include "pfbound/random.hpp"

#include "pfbound/normal.hpp"

namespace pfbound {

double RandomStream::normal() { return std_normal_quantile(uniform()); }

}  // namespace pfbound

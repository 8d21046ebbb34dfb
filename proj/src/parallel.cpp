#include "aoi/parallel.hpp"

#include <omp.h>

namespace aoi::parallel {

int max_threads() { return omp_get_max_threads(); }

} // namespace aoi::parallel

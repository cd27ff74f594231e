#ifndef GRADREC_GRADREC_HPP
#define GRADREC_GRADREC_HPP

#include "gradrec/errors.hpp"
#include "gradrec/spectral.hpp"
#include "gradrec/signal_gen.hpp"
#include "gradrec/reconstruct.hpp"
#include "gradrec/uniqueness.hpp"
#include "gradrec/nonuniform.hpp"
#include "gradrec/csv_io.hpp"
#include "gradrec/harness.hpp"

#endif  // GRADREC_GRADREC_HPP

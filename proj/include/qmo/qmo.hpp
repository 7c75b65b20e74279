#pragma once

#include "qmo/calculus.hpp"
#include "qmo/entry_mask.hpp"
#include "qmo/errors.hpp"
#include "qmo/io.hpp"
#include "qmo/mat_tuple.hpp"
#include "qmo/optimality.hpp"
#include "qmo/qmatrix.hpp"
#include "qmo/qsvd.hpp"
#include "qmo/quaternion.hpp"
#include "qmo/random.hpp"
#include "qmo/real_matrix.hpp"
#include "qmo/solvers.hpp"

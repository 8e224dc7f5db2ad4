#ifndef MGRID_MGRID_HPP_
#define MGRID_MGRID_HPP_

#include "mgrid/core.hpp"
#include "mgrid/error.hpp"
#include "mgrid/exact.hpp"
#include "mgrid/mesh.hpp"
#include "mgrid/scheme_linear.hpp"
#include "mgrid/scheme_scalar.hpp"
#include "mgrid/scheme_swe.hpp"
#include "mgrid/theta.hpp"

#endif  // MGRID_MGRID_HPP_

#pragma once

#include "peakon/errors.hpp"
#include "peakon/scalar.hpp"
#include "peakon/poly.hpp"
#include "peakon/peakon_model.hpp"
#include "peakon/forward_spectral.hpp"
#include "peakon/cont_frac.hpp"
#include "peakon/inverse_dirichlet.hpp"
#include "peakon/inverse_periodic.hpp"
#include "peakon/trace_validation.hpp"

#pragma once

#include "fluxspec/certificates.hpp"
#include "fluxspec/errors.hpp"
#include "fluxspec/flux.hpp"
#include "fluxspec/geometry.hpp"
#include "fluxspec/halfflux_oracle.hpp"
#include "fluxspec/harness.hpp"
#include "fluxspec/planar/assembly.hpp"
#include "fluxspec/planar/eigensolver.hpp"
#include "fluxspec/planar/mesh.hpp"
#include "fluxspec/planar/solve.hpp"
#include "fluxspec/radial.hpp"

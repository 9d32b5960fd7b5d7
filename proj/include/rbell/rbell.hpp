#pragma once

#include "rbell/chsh.hpp"
#include "rbell/classical.hpp"
#include "rbell/errors.hpp"
#include "rbell/four_qubit.hpp"
#include "rbell/io.hpp"
#include "rbell/protocols.hpp"
#include "rbell/qstate.hpp"
#include "rbell/reproduction.hpp"
#include "rbell/rng.hpp"
#include "rbell/spacetime.hpp"

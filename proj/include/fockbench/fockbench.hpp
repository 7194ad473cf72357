#pragma once

#include "fockbench/errors.hpp"
#include "fockbench/random.hpp"
#include "fockbench/parallel.hpp"
#include "fockbench/linalg.hpp"
#include "fockbench/fock_space.hpp"
#include "fockbench/block_operator.hpp"
#include "fockbench/qop.hpp"
#include "fockbench/model.hpp"
#include "fockbench/opdsl.hpp"
#include "fockbench/models.hpp"
#include "fockbench/verify.hpp"
#include "fockbench/matrix_market.hpp"

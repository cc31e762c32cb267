#pragma once

#include "elliptic/error.hpp"
#include "elliptic/falsify.hpp"
#include "elliptic/matrix_io.hpp"
#include "elliptic/operators.hpp"
#include "elliptic/sums.hpp"
#include "elliptic/symmat.hpp"
#include "elliptic/witnesses.hpp"

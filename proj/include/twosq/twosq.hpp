#pragma once

#include "twosq/errors.hpp"
#include "twosq/heuristics.hpp"
#include "twosq/pair_sieve.hpp"
#include "twosq/primes.hpp"
#include "twosq/report_io.hpp"
#include "twosq/representations.hpp"
#include "twosq/sieve_lemmas.hpp"
#include "twosq/statistics.hpp"

#pragma once

#include "melnikov/ba_genus0.hpp"
#include "melnikov/checks.hpp"
#include "melnikov/error.hpp"
#include "melnikov/floquet.hpp"
#include "melnikov/grid.hpp"
#include "melnikov/io.hpp"
#include "melnikov/kdv_solver.hpp"
#include "melnikov/report.hpp"
#include "melnikov/soliton.hpp"

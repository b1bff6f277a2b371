#pragma once

#include "qsdc/analysis.hpp"
#include "qsdc/channel.hpp"
#include "qsdc/config.hpp"
#include "qsdc/detection.hpp"
#include "qsdc/hermitian_eigen.hpp"
#include "qsdc/ledger.hpp"
#include "qsdc/protocol.hpp"
#include "qsdc/qubit.hpp"
#include "qsdc/report.hpp"
#include "qsdc/rng.hpp"

#pragma once

#include "cardioprec/biomarkers.hpp"
#include "cardioprec/error.hpp"
#include "cardioprec/label_volume.hpp"
#include "cardioprec/mask_io.hpp"
#include "cardioprec/parallel.hpp"
#include "cardioprec/pipeline.hpp"
#include "cardioprec/precision.hpp"
#include "cardioprec/report.hpp"
#include "cardioprec/rng.hpp"
#include "cardioprec/samples_csv.hpp"
#include "cardioprec/simulator.hpp"
#include "cardioprec/stats.hpp"
#include "cardioprec/types.hpp"
#include "cardioprec/volumetry.hpp"

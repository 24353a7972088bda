#pragma once

#include "horocat/errors.hpp"
#include "horocat/rational.hpp"
#include "horocat/poly.hpp"
#include "horocat/forms.hpp"
#include "horocat/models.hpp"
#include "horocat/isometries.hpp"
#include "horocat/groups.hpp"
#include "horocat/polyhedral.hpp"
#include "horocat/dirichlet.hpp"
#include "horocat/truncation.hpp"
#include "horocat/properties.hpp"
#include "horocat/coxeter.hpp"
#include "horocat/presets.hpp"
#include "horocat/io.hpp"
#include "horocat/cli.hpp"

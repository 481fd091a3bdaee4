#ifndef INCOMPAT_INCOMPAT_HPP
#define INCOMPAT_INCOMPAT_HPP

// Umbrella header for the qubit triplet incompatibility library.

#include "incompat/analytic_families.hpp"
#include "incompat/bloch.hpp"
#include "incompat/errors.hpp"
#include "incompat/ft_geometry.hpp"
#include "incompat/io.hpp"
#include "incompat/joint_measurability.hpp"
#include "incompat/mur.hpp"
#include "incompat/observable.hpp"
#include "incompat/optimizer.hpp"
#include "incompat/symmetry.hpp"

#endif  // INCOMPAT_INCOMPAT_HPP

#include "chainqfi/units.hpp"

namespace chainqfi {

double kelvin_to_mev(double kelvin) {
  return kelvin * UnitSystem::boltzmann_mev_per_kelvin;
}

double mev_to_kelvin(double mev) {
  return mev / UnitSystem::boltzmann_mev_per_kelvin;
}

}  // namespace chainqfi

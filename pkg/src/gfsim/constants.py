"""Unit conversions. Internal unit is Hartree throughout."""

EV_PER_HARTREE = 27.211386245988

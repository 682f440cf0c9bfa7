from morsedyn import specfun
from morsedyn.specfun import *

from morsedyn import morse
from morsedyn.morse import *

from morsedyn import ui
from morsedyn.ui import *

from morsedyn import dipole
from morsedyn.dipole import *

from morsedyn import oracle
from morsedyn.oracle import *

from morsedyn import spectral
from morsedyn.spectral import *

from morsedyn import config
from morsedyn.config import *

from morsedyn import pulse
from morsedyn.pulse import *

from morsedyn import propagate
from morsedyn.propagate import *

from morsedyn import lib
from morsedyn.lib import *

from morsedyn import fake
from morsedyn.fake import *

from morsedyn import plot
from morsedyn.plot import *

from morsedyn import cli

# rana-frog PG/TG FROG pulse retrieval
# Released under the MIT License (see LICENSE for details).


class FrogError(Exception):
    'Base class for retrieval and file format errors'


class ZeroEnergy(FrogError, ValueError):
    'Field has no energy, so its statistics are undefined'


class GridTooSmall(FrogError, ValueError):
    'Pulse cannot be contained on the requested grid; enlarge n'


class AllZero(FrogError, ValueError):
    'Trace is entirely non-positive after background subtraction'


class DegenerateMarginal(FrogError, ValueError):
    'Marginal has no positive values'


class NonFiniteQuotient(FrogError, ValueError):
    'Spectrum deconvolution produced non-finite values'


class DimensionMismatch(FrogError, ValueError):
    'Array sizes of field and trace do not agree'


class IndivisibleGrid(FrogError, ValueError):
    'Trace size is not divisible by the binning factor'


class IncompatibleGrids(FrogError, ValueError):
    'Grid transition target is not a larger grid'


class ParseError(FrogError, ValueError):
    'Input file does not follow the expected format'

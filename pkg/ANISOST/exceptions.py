"""Root of the exception hierarchy shared by the numerical apps."""


class AnisoError(Exception):
    """
    Base class for every domain error raised by Mesh, Polynomials, Fields,
    Smoothness, Approximation and Refinement.

    The experiment commands catch this class and turn it into a
    ``CommandError`` so any module failure gives a nonzero exit status.
    """

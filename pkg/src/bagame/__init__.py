"""Schmidt's game and the absolute game on concrete metric spaces, with a
horoball-avoidance strategy whose outcomes are badly approximable."""

__version__ = "0.1.0"

"""satclass: builds satisfaction classes for finite first-order models by
Henkin witness grids, bounded and omega-iterated provability, and path
extraction through a binary tree of partial truth assignments."""

__version__ = "0.1.0"

from .render import PlotSpec, SchemaError, curve_data, read_rows, render_curves

__version__ = "0.1.0"

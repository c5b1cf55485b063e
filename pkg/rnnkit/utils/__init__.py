"""File formats, data loading, report rendering and logging setup."""

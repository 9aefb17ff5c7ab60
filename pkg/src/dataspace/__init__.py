"""A dataspace coordination kernel: assertions, tries, patches, actors."""

__all__ = [
    "values",
    "trie",
    "patch",
    "mux",
    "engine",
    "facet",
    "dataflow",
    "drivers",
    "trace",
]

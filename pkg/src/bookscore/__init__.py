"""bookscore: weave a dense instrumental soundtrack for a book from its
movie adaptation's album."""

__version__ = "0.1.0"

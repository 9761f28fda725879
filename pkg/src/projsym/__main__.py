from projsym.cli import entry_point

entry_point()

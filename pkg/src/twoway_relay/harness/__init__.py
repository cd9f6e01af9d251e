"""Monte-Carlo drivers and the command-line interface."""

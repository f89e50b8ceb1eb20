# Copyright 2024 by the corrlab authors.
# Licensed under the Apache 2.0 License.
from corrlab.cli import main

main()

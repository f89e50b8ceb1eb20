# Copyright 2024 by the corrlab authors.
# Licensed under the Apache 2.0 License.
"""
*Adapters* connect corrlab dataflows and values to files. *Readers* are
output things that source an event stream from a file (CsvReader);
*writers* are input things that store a stream (CsvWriter,
PandasFrameWriter). The json module holds the codecs for operator tuples
and Gram matrices.

Every file written here is written atomically: into a temporary file in the
target directory, renamed over the target once complete.
"""

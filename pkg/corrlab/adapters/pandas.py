# Copyright 2024 by the corrlab authors.
# Licensed under the Apache 2.0 License.
"""
Pandas (http://pandas.pydata.org) is a data analysis library.
This module converts sweep and pipeline event streams into DataFrames,
with the same columns as the CSV files.
"""
import pandas as pd

from corrlab.base import InputThing
from corrlab.adapters.csv import default_event_mapper


class PandasFrameWriter(InputThing):
    """Create a pandas DataFrame from the event stream passed to this
    input thing. Columns and cells come from an EventSpreadsheetMapping;
    numeric cells are converted back to numbers.
    """
    def __init__(self, mapper=default_event_mapper):
        self.mapper = mapper
        self.rows = []
        self.result = None # we will store the frame here when done

    def on_next(self, x):
        self.rows.append(self.mapper.event_to_row(x))

    def on_completed(self):
        frame = pd.DataFrame(self.rows, columns=self.mapper.get_header_row())
        for column in frame.columns:
            converted = pd.to_numeric(frame[column], errors='coerce')
            if converted.notna().sum() == frame[column].ne('').sum():
                frame[column] = converted
        self.result = frame

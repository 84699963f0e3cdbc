"""Write and read verification reports.

There is a separate :doc:`output page </output>` with details on what goes into the
output and how it is formatted.

Each check writes one table to <output_dir>/<name>.csv in the ECSV flavor of CSV, whose commented
YAML header carries the check id, its tolerances and its parameters, so that pass flags can be
re-derived from the file alone. Decay checks also write a gnuplot-ready <name>.dat. A run ends
with <output_dir>/summary.json.
"""
from __future__ import print_function, division

import os
import os.path
import glob
import json
import inspect

import numpy as np

import astropy.table

from six import iteritems

# Columns of every report table, in order.
columns = ('check','case','point','param_name','param','value','est_error','ratio','passed')

_dtypes = (str,str,float,str,float,float,float,float,bool)

def make_table(check,rows,meta = None):
    """Build a report table from row tuples (case,point,param_name,param,value,est_error,ratio,passed)."""
    data = [[check]*len(rows)] + [[row[k] for row in rows] for k in range(len(columns) - 1)]
    if not rows:
        data = [[ ] for _ in columns]
    table = astropy.table.Table(data,names = columns,dtype = _dtypes,meta = meta or { })
    return table

class Writer(object):
    """Report output writer.

    Args:
        output_dir(str): Directory for report files, created if necessary.
        output_no_clobber(bool): Refuse to overwrite existing report files.
        no_dat(bool): Do not write gnuplot .dat files.

    Raises:
        RuntimeError: Unable to create the output directory.
    """
    def __init__(self,output_dir,output_no_clobber = False,no_dat = False):
        if not output_dir:
            raise RuntimeError('Missing required output-dir parameter.')
        self.output_dir = output_dir
        self.output_no_clobber = output_no_clobber
        self.no_dat = no_dat
        try:
            if not os.path.isdir(self.output_dir):
                os.makedirs(self.output_dir)
        except OSError as e:
            raise RuntimeError(str(e))

    def description(self):
        return 'Reports will be saved to %s' % self.output_dir

    def _path(self,name,extension):
        path = os.path.join(self.output_dir,name + extension)
        if self.output_no_clobber and os.path.exists(path):
            raise RuntimeError('Will not overwrite existing report %s.' % path)
        return path

    def write(self,report,trace = None):
        """Save one check report.

        Args:
            report(CheckReport): Completed report.
            trace(callable): Function to call for tracing resource usage.
        """
        table = report.table
        table.write(self._path(report.name,'.csv'),format = 'ascii.ecsv',delimiter = ',',
            overwrite = True)
        if not self.no_dat and report.check.startswith('decay'):
            self.write_dat(report.name,table)
        if trace is not None:
            trace('wrote %s' % report.name)

    def write_dat(self,name,table):
        """Write log10(point) and log10(value) blocks per case, separated by blank lines."""
        with open(self._path(name,'.dat'),'w') as f:
            for case in sorted(set(table['case'])):
                rows = table[table['case'] == case]
                f.write('# %s\n' % case)
                for point,value in zip(rows['point'],rows['value']):
                    if point > 0 and value > 0:
                        f.write('%.10g %.10g\n' % (np.log10(point),np.log10(value)))
                f.write('\n\n')

    def finalize(self,reports,interrupted = False):
        """Write summary.json for a list of reports and return the summary dictionary."""
        summary = {
            'interrupted': interrupted,
            'passed': all(report.passed for report in reports),
            'checks': [report.summary() for report in reports],
            'failed': [report.name for report in reports if not report.passed],
        }
        with open(os.path.join(self.output_dir,'summary.json'),'w') as f:
            json.dump(summary,f,indent = 2,sort_keys = True)
        return summary

    @staticmethod
    def add_args(parser):
        """Add command-line arguments for constructing a new :class:`Writer`.

        The added arguments are our constructor parameters with '_' replaced by '-' in the names.

        Args:
            parser(argparse.ArgumentParser): Arguments will be added to this parser object using its
                add_argument method.
        """
        parser.add_argument('--output-dir', default = 'reports', metavar = 'DIR',
            help = 'Directory where report files are written.')
        parser.add_argument('--output-no-clobber', action = 'store_true',
            help = 'Do not overwrite existing report files.')
        parser.add_argument('--no-dat', action = 'store_true',
            help = 'Do not write gnuplot .dat files for decay checks.')

    @classmethod
    def from_args(cls,args):
        """Create a new :class:`Writer` object from a set of arguments.

        Args:
            args(object): A set of arguments accessed as a :py:class:`dict` using the
                built-in :py:func:`vars` function. Any extra arguments beyond those defined
                in :func:`add_args` will be silently ignored.

        Returns:
            :class:`Writer`: A newly constructed Writer object.
        """
        # Look up the named constructor parameters.
        pnames = inspect.getfullargspec(cls.__init__).args[1:]
        # Get a dictionary of the arguments provided.
        args_dict = vars(args)
        # Filter the dictionary to only include constructor parameters.
        filtered_dict = { key:args_dict[key] for key in (set(pnames) & set(args_dict)) }
        return cls(**filtered_dict)

class Reader(object):
    """Report output reader.

    The reader loads every report table in a directory into memory in the constructor, as a
    dictionary `tables` keyed by report name, in name order.

    Args:
        input_dir(str): Directory containing report .csv files.

    Raises:
        RuntimeError: Missing directory or unreadable table.
    """
    def __init__(self,input_dir):
        if not input_dir or not os.path.isdir(input_dir):
            raise RuntimeError('Missing report directory "%s".' % input_dir)
        self.input_dir = input_dir
        self.tables = { }
        for path in sorted(glob.glob(os.path.join(input_dir,'*.csv'))):
            name = os.path.splitext(os.path.basename(path))[0]
            try:
                self.tables[name] = astropy.table.Table.read(path,format = 'ascii.ecsv')
            except Exception as e:
                raise RuntimeError('Unable to read report %s: %s' % (path,e))

    def summary(self):
        """The run summary written next to the tables, or None."""
        path = os.path.join(self.input_dir,'summary.json')
        if not os.path.exists(path):
            return None
        with open(path) as f:
            return json.load(f)

    def items(self):
        return iteritems(self.tables)

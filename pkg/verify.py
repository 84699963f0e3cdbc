#!/usr/bin/env python
"""Run numerical verification suites for Littlewood-Paley square functions.
"""
from __future__ import print_function, division

import argparse
import logging

import lpmo

def run(args,trace):
    tables = lpmo.config.load_suite(args.config)
    if args.checks:
        wanted = set(args.checks) | set(lpmo.config.resolve_check_id(item) for item in args.checks)
        tables = [table for table in tables if table['name'] in wanted or table['check'] in wanted]
        if not tables:
            raise RuntimeError('No checks in %s match %s.' % (args.config,', '.join(args.checks)))
    for table in tables:
        # Command-line quadrature options override the suite, and are validated here.
        base = lpmo.quadrature.QuadConfig.from_dict(table.get('quad',{ }))
        table['quad'] = lpmo.quadrature.QuadConfig.from_args(args,base).as_dict()
    writer = lpmo.output.Writer.from_args(args)
    if args.verbose:
        print(writer.description())
    trace('initialized')
    code,reports = lpmo.verify.run_suite(tables,writer,args.max_workers,trace,args.seed)
    for report in reports:
        print('%-32s %-22s %s %7.1fs%s' % (report.name,report.check,
            'pass' if report.passed else 'FAIL',report.runtime,
            '  (%s)' % report.error if report.error else ''))
    return code

def list_checks(args):
    for check_id,text in lpmo.verify.descriptions.items():
        print('%-22s %s' % (check_id,text))
    return 0

def kernels(args):
    cfg = lpmo.quadrature.QuadConfig()
    for kernel in lpmo.kernels.builtin_kernels(args.dim,cfg):
        print(kernel.description())
        print('    cancellation residual %.3g, sampled Lip seminorm >= %.4g' % (
            lpmo.kernels.check_cancellation(kernel,cfg),
            lpmo.kernels.estimate_lip_seminorm(kernel,100000,seed = args.seed or 0)))
    return 0

def report(args):
    reader = lpmo.output.Reader(args.report_dir)
    # Runtimes are not part of the tables, so they are carried over from any previous summary.
    previous = reader.summary() or { }
    runtimes = { entry['name']:entry['runtime'] for entry in previous.get('checks',[ ]) }
    reports = [ ]
    for name,table in sorted(reader.items()):
        item = lpmo.verify.CheckReport(name,table.meta.get('check'),table,
            runtimes.get(name,float('nan')),table.meta.get('error'))
        reports.append(item)
        print('%-32s %-22s %s' % (name,item.check,'pass' if item.passed else 'FAIL'))
        for key,bound in sorted(item.tolerances.items()):
            print('    %-16s %12.5g <= %g' % (key,item.metrics.get(key,float('nan')),bound))
    summary = lpmo.output.Writer(args.report_dir).finalize(reports)
    return 0 if summary['passed'] else 1

def main():
    # Initialize and parse command-line arguments.
    parser = argparse.ArgumentParser(formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument('--verbose', action = 'store_true',
        help = 'Provide verbose output.')
    parser.add_argument('--debug', action = 'store_true',
        help = 'Provide debug output.')
    parser.add_argument('--memory-trace', action = 'store_true',
        help = 'Trace memory usage (requires the psutil module).')
    parser.add_argument('--seed', type = int, default = None,
        help = 'Base seed for sampling checks, overriding the suite.')
    subparsers = parser.add_subparsers(dest = 'command')
    run_parser = subparsers.add_parser('run', help = 'Run a verification suite.',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    run_parser.add_argument('config', help = 'Suite config file (JSON).')
    run_parser.add_argument('--checks', nargs = '+', default = None, metavar = 'NAME',
        help = 'Only run checks with these names or check ids.')
    run_parser.add_argument('--max-workers', type = int, default = None, metavar = 'N',
        help = 'Maximum number of worker processes, defaults to LPMO_MAX_WORKERS or the CPU count.')
    quad_group = run_parser.add_argument_group('Quadrature options',
        'Override quadrature settings of every check.')
    lpmo.quadrature.QuadConfig.add_args(quad_group)
    output_group = run_parser.add_argument_group('Output control',
        'Specify options to control report output.')
    lpmo.output.Writer.add_args(output_group)
    subparsers.add_parser('list-checks', help = 'List the available check ids.')
    kernels_parser = subparsers.add_parser('kernels', help = 'Describe the built-in kernels.')
    kernels_parser.add_argument('--dim', type = int, default = 2,
        help = 'Dimension n.')
    report_parser = subparsers.add_parser('report', help = 'Re-judge saved reports.')
    report_parser.add_argument('report_dir', help = 'Directory of saved reports.')
    subparsers.add_parser('defaults', help = 'Print the built-in check defaults.')
    args = parser.parse_args()

    level = logging.DEBUG if args.debug else (logging.INFO if args.verbose else logging.WARNING)
    logging.basicConfig(level = level,format = '%(levelname)s %(name)s: %(message)s')

    trace = lpmo.trace.Memory(args.memory_trace)
    trace('begin')

    try:
        if args.command == 'run':
            return run(args,trace)
        elif args.command == 'list-checks':
            return list_checks(args)
        elif args.command == 'kernels':
            return kernels(args)
        elif args.command == 'report':
            return report(args)
        elif args.command == 'defaults':
            lpmo.config.print_defaults()
            return 0
        parser.print_help()
        return -1

    except RuntimeError as e:
        print(str(e))
        return -1

if __name__ == '__main__':
    import sys
    sys.exit(main())

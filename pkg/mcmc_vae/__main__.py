#!/usr/bin/env python3
# coding: utf-8
#
# Copyright 2026 mcmc_vae Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
# SPDX-License-Identifier: Apache-2.0

import argparse
import logging
import os
import sys

from . import cfgparse
from . import harness
from .errors import ConfigError, McmcVaeError

VERBS = ('generate-data', 'train', 'evaluate', 'run', 'sweep')


def parse_values(text):
    """Sweep values given on the command line, typed like config values."""
    value = cfgparse.values(cfgparse.parse('[sweep]\nvalues = %s\n' % text))
    value = value['sweep']['values']
    return value if isinstance(value, list) else [value]


def _load(args):
    if (args.config is None) == (args.preset is None):
        raise ConfigError("exactly one of --config and --preset is required")
    cfg = harness.load_config(path=args.config, preset=args.preset)
    overrides = {}
    if args.seed is not None:
        overrides['train.seed'] = args.seed
    if args.out is not None:
        overrides['output.dir'] = args.out
    if overrides:
        cfg = harness.with_overrides(cfg, overrides)
    return cfg


def execute(args):
    cfg = _load(args)
    if args.dump_config:
        sys.stdout.write(harness.dump_config(cfg))
        return
    out = cfg.output_dir
    if args.verb == 'generate-data':
        os.makedirs(out, exist_ok=True)
        harness.generate_data(cfg.data, os.path.join(out, 'data.bin'))
    elif args.verb == 'train':
        harness.train_experiment(cfg, out)
    elif args.verb == 'evaluate':
        harness.evaluate_experiment(cfg, out)
    elif args.verb == 'run':
        harness.run(cfg, out)
    else:
        if not args.axis or args.values is None:
            raise ConfigError("sweep needs --axis and --values")
        harness.sweep(cfg, args.axis, parse_values(args.values), out, args.jobs)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog='mcmc_vae',
        description='Train hierarchical VAEs with adaptive MCMC refinement.')
    parser.add_argument('verb', choices=VERBS)
    parser.add_argument('--config', type=str, help='Path to a config file')
    parser.add_argument('--preset', type=str,
                        help='Named preset (%s)' % ', '.join(harness.PRESETS))
    parser.add_argument('--out', type=str, help='Output directory')
    parser.add_argument('--seed', type=int, help='Override train.seed')
    parser.add_argument('--dump-config', action='store_const', const=True,
                        help='Print the resolved config and exit.')
    parser.add_argument('--axis', type=str, help='Sweep key, e.g. train.variant')
    parser.add_argument('--values', type=str, help='Comma separated sweep values')
    parser.add_argument('--jobs', type=int, default=1, help='Sweep worker processes')
    parser.add_argument('--verbose', action='store_const', const=True,
                        help='Log debug messages.')

    args = parser.parse_args(argv)

    logging.basicConfig(stream=sys.stderr,
                        level=logging.DEBUG if args.verbose else logging.INFO,
                        format='%(levelname)s %(name)s: %(message)s')

    try:
        execute(args)
    except ConfigError as e:
        print("error: %s: %s" % (type(e).__name__, e), file=sys.stderr)
        return 1
    except (McmcVaeError, OSError) as e:
        print("error: %s: %s" % (type(e).__name__, e), file=sys.stderr)
        return 2
    return 0


if __name__ == '__main__':
    sys.exit(main())

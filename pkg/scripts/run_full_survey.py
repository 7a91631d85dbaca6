import logging
import os
from datetime import datetime

from evaluation.evaluate_seeds import DEFAULT_SEED_MUS, evaluate_seeds, summarize_results, summarize_slice
from evaluation.visualize_results import create_viz_acceptance, create_viz_fibonacci_growth, create_viz_slice
from bowditch.bq import fibonacci_growth_profile
from realcase.real_characters import construct_real_seed
from render.pixmap import write_ppm
from render.slices import LinePlane, SliceSpec, evaluate_slice


def run_full_survey(
        y_factors=(1, 2, 4, 10),
        growth_depth=6,
        slice_size=64,
        slice_radius=1.0,
        workers=4,
        write_output=True
):
    """
    Surveys the real seeds and renders a slice through the first one.

    Args:
        y_factors: multiples of each seed's default y to test
        growth_depth: Farey depth of the Fibonacci growth profiles
        slice_size: width and height of the rendered slice in pixels
        slice_radius: half-width of the slice window around the seed
        workers: processes used to render the slice
        write_output: whether to write output to the data folder
    """
    print(f'Survey started at {datetime.now().strftime("%H:%M:%S")}')

    results = evaluate_seeds(DEFAULT_SEED_MUS, y_factors=y_factors, growth_depth=growth_depth)
    summarized_results = summarize_results(results)

    mu = DEFAULT_SEED_MUS[0]
    seed = construct_real_seed(mu)
    spec = SliceSpec(
        mu=mu,
        plane=LinePlane(seed.triple, (0, 1, 1)),
        window=(-slice_radius, slice_radius, -slice_radius, slice_radius),
        width=slice_size,
        height=slice_size,
    )
    grid = evaluate_slice(spec, workers)
    slice_summary = summarize_slice(grid)

    fig = create_viz_acceptance(summarized_results)
    fig2 = create_viz_fibonacci_growth(fibonacci_growth_profile(seed.triple, mu, growth_depth))
    fig3 = create_viz_slice(grid, window=spec.window)

    if write_output:
        os.makedirs('data', exist_ok=True)
        timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')
        results.to_csv(f'data/seed_results_{timestamp}.csv', index=False)
        summarized_results.to_csv(f'data/summarized_results_{timestamp}.csv', index=False)
        slice_summary.to_csv(f'data/slice_summary_{timestamp}.csv', index=False)
        write_ppm(grid, None, f'data/slice_{timestamp}.ppm')
        fig.savefig(f'data/acceptance_viz_{timestamp}.png')
        fig2.savefig(f'data/fibonacci_growth_viz_{timestamp}.png')
        fig3.savefig(f'data/slice_viz_{timestamp}.png')

    print(summarized_results.to_string(index=False))
    print(f'Survey completed at {datetime.now().strftime("%H:%M:%S")}')

if __name__ == "__main__":
    logging.basicConfig(level=logging.WARNING, format="%(asctime)s %(name)s %(levelname)s %(message)s")
    run_full_survey()

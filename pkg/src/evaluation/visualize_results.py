import matplotlib.pylab as plt
import pandas as pd
import seaborn as sns

from render.pixmap import grid_to_rgb


def create_viz_slice(grid, palette=None, window=None):
    """
    Creates visualization of a rendered slice, colored by pixel verdict
    """
    fig, ax = plt.subplots()
    extent = None if window is None else (window[0], window[1], window[2], window[3])
    ax.imshow(grid_to_rgb(grid, palette), extent=extent, interpolation='nearest')
    ax.set_title('Slice Verdicts')
    ax.set_xlabel('Re')
    ax.set_ylabel('Im')

    return fig


def create_viz_fibonacci_growth(profile):
    """
    Creates visualization of log+|trace| against the Fibonacci weight of each region
    """
    data = pd.DataFrame([{'weight': s.weight, 'log_plus': s.log_plus, 'depth': s.depth} for s in profile])
    fig, ax = plt.subplots()
    sns.scatterplot(data=data, x='weight', y='log_plus', hue='depth', palette='viridis', ax=ax)
    ax.set_title('Trace Growth by Fibonacci Weight')
    ax.set_xlabel('Fibonacci Weight')
    ax.set_ylim(bottom=0)
    ax.set_ylabel('log+ |trace|')
    ax.legend(title='Depth')

    return fig


def create_viz_acceptance(summarized_results):
    """
    Creates visualization of seed acceptance rate per mu
    """
    fig, ax = plt.subplots()
    sns.barplot(data=summarized_results, x='mu', y='acceptance_rate', ax=ax)
    ax.set_title('Seed Acceptance Rate by Parameters')
    ax.set_xlabel('mu = (p, q, r, s)')
    ax.set_ylim(0, 1)
    ax.set_ylabel('Accepted')
    ax.yaxis.set_major_formatter(plt.FuncFormatter('{0:.0%}'.format))

    return fig

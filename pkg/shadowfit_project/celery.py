import os
from celery import Celery

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'shadowfit_project.settings')

app = Celery('shadowfit_project')

# CELERY_* settings; eager unless CELERY_TASK_ALWAYS_EAGER is turned off
app.config_from_object('django.conf:settings', namespace='CELERY')

# Picks up functional_shadows.tasks
app.autodiscover_tasks()

# Generated by Django 6.0 on 2026-10-18 09:12

import django.utils.timezone
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(db_index=True, max_length=50)),
                ('options', models.JSONField(blank=True, default=dict)),
                ('seed', models.BigIntegerField(blank=True, null=True)),
                ('status', models.CharField(choices=[('RUNNING', 'Running'), ('OK', 'OK'), ('FAILED', 'Failed')], default='RUNNING', max_length=10)),
                ('message', models.TextField(blank=True, default='')),
                ('outputs', models.JSONField(blank=True, default=list)),
                ('started_at', models.DateTimeField(default=django.utils.timezone.now)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'ordering': ['-started_at', '-id'],
            },
        ),
        migrations.CreateModel(
            name='ModelArtifact',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('config_key', models.CharField(max_length=64, unique=True)),
                ('corpus_sha256', models.CharField(db_index=True, max_length=64)),
                ('algorithm', models.CharField(choices=[('CBOW', 'CBOW'), ('SGNS', 'SGNS')], max_length=10)),
                ('window', models.PositiveIntegerField()),
                ('dim', models.PositiveIntegerField()),
                ('seed', models.BigIntegerField()),
                ('config', models.JSONField(blank=True, default=dict)),
                ('path', models.CharField(max_length=500)),
                ('file_sha256', models.CharField(max_length=64)),
                ('vocab_size', models.PositiveIntegerField(default=0)),
                ('total_tokens', models.PositiveBigIntegerField(default=0)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'ordering': ['algorithm', 'window', 'dim'],
                'indexes': [models.Index(fields=['algorithm', 'window'], name='lab_artifact_algo_window_idx')],
            },
        ),
    ]
